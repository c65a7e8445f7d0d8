#ifndef AGGSPEC_VERSION_HPP
#define AGGSPEC_VERSION_HPP

namespace aggspec {

inline constexpr const char* kVersion = "aggspec 1.0.0";

}  // namespace aggspec

#endif  // AGGSPEC_VERSION_HPP
