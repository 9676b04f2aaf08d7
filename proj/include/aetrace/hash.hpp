#pragma once

#include <string>
#include <string_view>

namespace aetrace {

// SHA-256, lowercase hex. Used for gateway cache keys and config provenance.
std::string sha256_hex(std::string_view data);

} // namespace aetrace
