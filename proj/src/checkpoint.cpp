#include "gsx/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>

#include <json.hpp>

namespace gsx {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

void save_checkpoint(const ad::ParameterSet& params, const std::string& path) {
  nlohmann::json header;
  header["arrays"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const ad::Parameter& p = params.at(i);
    header["arrays"].push_back({{"name", p.name},
                                {"rows", p.value.rows()},
                                {"cols", p.value.cols()},
                                {"offset", offset}});
    offset += static_cast<std::uint64_t>(p.value.size()) * sizeof(double);
  }
  const std::string htext = header.dump();
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "save_checkpoint: cannot open " + path);
  const std::uint64_t hlen = htext.size();
  out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix& v = params.at(i).value;
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      for (Eigen::Index c = 0; c < v.cols(); ++c) {
        const double d = v(r, c);
        out.write(reinterpret_cast<const char*>(&d), sizeof(d));
      }
    }
  }
  require(out.good(), "save_checkpoint: write failed for " + path);
}

std::map<std::string, Matrix> read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "read_checkpoint: cannot open " + path);
  std::uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  require(in.good(), "read_checkpoint: truncated header length");
  std::string htext(hlen, '\0');
  in.read(htext.data(), static_cast<std::streamsize>(hlen));
  require(in.good(), "read_checkpoint: truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(htext);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("read_checkpoint: bad header JSON: " + std::string(e.what()));
  }
  const std::streampos data_start = in.tellg();
  std::map<std::string, Matrix> out;
  for (const auto& entry : header.at("arrays")) {
    const std::string name = entry.at("name").get<std::string>();
    const Eigen::Index rows = entry.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = entry.at("cols").get<Eigen::Index>();
    const std::uint64_t offset = entry.at("offset").get<std::uint64_t>();
    in.seekg(data_start + static_cast<std::streamoff>(offset));
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        double d = 0.0;
        in.read(reinterpret_cast<char*>(&d), sizeof(d));
        m(r, c) = d;
      }
    }
    require(in.good(), "read_checkpoint: truncated data for array " + name);
    out.emplace(name, std::move(m));
  }
  return out;
}

void load_checkpoint(ad::ParameterSet& params, const std::string& path) {
  const auto arrays = read_checkpoint(path);
  for (const auto& [name, value] : arrays) {
    ad::Parameter* p = params.find(name);
    require(p != nullptr, "load_checkpoint: unknown parameter " + name);
    require(p->value.rows() == value.rows() && p->value.cols() == value.cols(),
            "load_checkpoint: shape mismatch for " + name);
    p->value = value;
  }
}

}  // namespace gsx
