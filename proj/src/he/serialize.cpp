#include "vfl/he/serialize.hpp"

#include <stdexcept>

namespace vfl::he {

std::string to_hex(const mpz_class& v) {
  if (v < 0) throw std::invalid_argument("to_hex: negative value");
  return v.get_str(16);
}

mpz_class from_hex(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("from_hex: empty string");
  mpz_class v;
  if (v.set_str(s, 16) != 0) throw std::invalid_argument("from_hex: malformed hex '" + s + "'");
  return v;
}

nlohmann::json to_json(const PublicKey& pk) {
  return {{"n", to_hex(pk.n)},
          {"g", to_hex(pk.g)},
          {"h", to_hex(pk.noise_base)},
          {"key_bits", pk.key_bits},
          {"noise_bits", pk.noise_bits},
          {"key_id", pk.key_id}};
}

PublicKey public_key_from_json(const nlohmann::json& j) {
  PublicKey pk;
  pk.n = from_hex(j.at("n").get<std::string>());
  pk.n_squared = pk.n * pk.n;
  pk.g = from_hex(j.at("g").get<std::string>());
  pk.noise_base = from_hex(j.at("h").get<std::string>());
  pk.key_bits = j.at("key_bits").get<int>();
  pk.noise_bits = j.value("noise_bits", 128);
  pk.key_id = j.at("key_id").get<std::uint64_t>();
  return pk;
}

nlohmann::json to_json(const Ciphertext& c) { return {{"c", to_hex(c.value)}, {"key_id", c.key_id}}; }

Ciphertext ciphertext_from_json(const nlohmann::json& j) {
  return {from_hex(j.at("c").get<std::string>()), j.at("key_id").get<std::uint64_t>()};
}

}  // namespace vfl::he
