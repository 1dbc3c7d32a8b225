#pragma once

#include <filesystem>

#include "sersrecon/net.hpp"

namespace sers {

// Model file: versioned JSON holding the config, the trainable mask and the
// flattened parameter arrays (conv [out_ch][in_ch][k], dense [out][in], both
// row-major) encoded as base64 of the raw little-endian doubles, so a load
// reproduces every parameter bit for bit.
void save_network(const Network& net, const std::filesystem::path& path);

Network load_network(const std::filesystem::path& path);

}  // namespace sers
