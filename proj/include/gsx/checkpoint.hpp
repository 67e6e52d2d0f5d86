#pragma once

#include <map>
#include <string>

#include "gsx/autodiff.hpp"

namespace gsx {

/// Parameter checkpoint file:
///   8-byte little-endian header length,
///   JSON header {"arrays": [{"name", "rows", "cols", "offset"}, ...]},
///   raw row-major little-endian 64-bit floats, offsets relative to the
///   start of the data section.
void save_checkpoint(const ad::ParameterSet& params, const std::string& path);

/// Loads values into an existing set; every stored name must exist with a
/// matching shape.
void load_checkpoint(ad::ParameterSet& params, const std::string& path);

/// Raw read, for tools that inspect checkpoints without a model.
std::map<std::string, Matrix> read_checkpoint(const std::string& path);

}  // namespace gsx
