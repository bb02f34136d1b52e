#pragma once

#include "vfl/he/paillier.hpp"

namespace vfl::test {

// Smallest admissible key; generated once per binary.
inline const he::Keypair& small_keys() {
  static const he::Keypair keys = he::keygen(he::kMinKeyBits, 11);
  return keys;
}

}  // namespace vfl::test
