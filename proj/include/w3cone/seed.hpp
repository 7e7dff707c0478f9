#pragma once

#include <cstdint>
#include <cstdlib>
#include <string>

namespace w3cone {

inline constexpr std::uint64_t kDefaultSeed = 0xC0FFEE;

// Seed for randomized checks; W3CONE_SEED overrides the default (decimal or 0x-hex).
inline std::uint64_t seed_from_env() {
  const char* env = std::getenv("W3CONE_SEED");
  if (env == nullptr || *env == '\0') return kDefaultSeed;
  return std::stoull(env, nullptr, 0);
}

}  // namespace w3cone
