#pragma once

#include "vfl/he/paillier.hpp"

#include <json.hpp>

#include <string>

namespace vfl::he {

// Big integers travel as big-endian lowercase hex strings.
std::string to_hex(const mpz_class& v);
mpz_class from_hex(const std::string& s);

nlohmann::json to_json(const PublicKey& pk);
PublicKey public_key_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Ciphertext& c);
Ciphertext ciphertext_from_json(const nlohmann::json& j);

}  // namespace vfl::he
