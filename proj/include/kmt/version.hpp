#ifndef KMT_VERSION_HPP
#define KMT_VERSION_HPP

namespace kmt {
inline constexpr const char* kVersion = "0.1.0";
}

#endif
