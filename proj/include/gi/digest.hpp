#pragma once

#include <string>
#include <string_view>

namespace gi {

// Lowercase hex SHA-256. Fingerprints and transcript keys rely on its
// 256-bit width; collisions are treated as impossible.
std::string sha256_hex(std::string_view data);

}  // namespace gi
