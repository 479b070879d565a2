#ifndef NFHN_VERSION_HPP
#define NFHN_VERSION_HPP

namespace nfhn {

inline constexpr const char* version_string = "0.1.0";

}

#endif
