#include "vfl/logreg/transcript_io.hpp"

#include "vfl/common/error.hpp"
#include "vfl/he/serialize.hpp"

#include <fstream>
#include <istream>
#include <ostream>

namespace vfl::logreg {
namespace {

using nlohmann::json;

json cts_to_json(const std::vector<he::Ciphertext>& cts) {
  json arr = json::array();
  for (const auto& c : cts) arr.push_back(he::to_hex(c.value));
  return arr;
}

std::vector<he::Ciphertext> cts_from_json(const json& arr, std::uint64_t key_id) {
  std::vector<he::Ciphertext> out;
  out.reserve(arr.size());
  for (const auto& s : arr) out.push_back({he::from_hex(s.get<std::string>()), key_id});
  return out;
}

json vec_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vec_from_json(const json& arr) {
  const auto values = arr.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

void write_transcript(std::ostream& out, const Transcript& t, bool include_oracle) {
  json header = {{"type", "header"},
                 {"version", 1},
                 {"pk", he::to_json(t.pk)},
                 {"learning_rate", t.learning_rate},
                 {"coordinator_updates", t.coordinator_updates},
                 {"labels", t.labels == LabelEncoding::kZeroOne ? "zero_one" : "plus_minus_one"},
                 {"frac_bits", t.codec.frac_bits},
                 {"d_a", t.d_a},
                 {"d_b", t.d_b}};
  out << header.dump() << '\n';
  for (const auto& r : t.rounds) {
    json line = {{"type", "round"},
                 {"round", r.round},
                 {"epoch", r.epoch},
                 {"batch", r.batch},
                 {"enc_u", cts_to_json(r.enc_u)},
                 {"enc_v", cts_to_json(r.enc_v)},
                 {"enc_vxa", cts_to_json(r.enc_vxa)},
                 {"enc_vxb", cts_to_json(r.enc_vxb)},
                 {"a_u_units", r.a_u_units},
                 {"grad_a", vec_to_json(r.grad_a)},
                 {"grad_b", vec_to_json(r.grad_b)}};
    if (t.coordinator_updates) {
      line["theta_a_returned"] = vec_to_json(r.theta_a_returned);
      line["theta_b_returned"] = vec_to_json(r.theta_b_returned);
    }
    if (include_oracle) line["oracle"] = {{"theta_a", vec_to_json(r.oracle.theta_a)}, {"theta_b", vec_to_json(r.oracle.theta_b)}};
    out << line.dump() << '\n';
  }
}

Transcript read_transcript(std::istream& in) {
  Transcript t;
  std::string text;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.empty()) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw ConfigError("transcript line " + std::to_string(line_no) + ": " + e.what());
    }
    const auto type = j.value("type", "");
    if (type == "header") {
      t.pk = he::public_key_from_json(j.at("pk"));
      t.learning_rate = j.at("learning_rate").get<double>();
      t.coordinator_updates = j.at("coordinator_updates").get<bool>();
      t.labels = j.at("labels").get<std::string>() == "zero_one" ? LabelEncoding::kZeroOne : LabelEncoding::kPlusMinusOne;
      t.codec = he::CodecParams::signed_default();
      t.codec.frac_bits = j.at("frac_bits").get<int>();
      t.d_a = j.at("d_a").get<std::size_t>();
      t.d_b = j.at("d_b").get<std::size_t>();
      have_header = true;
      continue;
    }
    if (type != "round" || !have_header)
      throw ConfigError("transcript line " + std::to_string(line_no) + ": expected a round after the header");
    RoundRecord r;
    r.round = j.at("round").get<std::size_t>();
    r.epoch = j.at("epoch").get<int>();
    r.batch = j.at("batch").get<std::vector<std::size_t>>();
    r.enc_u = cts_from_json(j.at("enc_u"), t.pk.key_id);
    r.enc_v = cts_from_json(j.at("enc_v"), t.pk.key_id);
    r.enc_vxa = cts_from_json(j.at("enc_vxa"), t.pk.key_id);
    r.enc_vxb = cts_from_json(j.at("enc_vxb"), t.pk.key_id);
    r.a_u_units = j.at("a_u_units").get<std::vector<std::int64_t>>();
    r.grad_a = vec_from_json(j.at("grad_a"));
    r.grad_b = vec_from_json(j.at("grad_b"));
    if (j.contains("theta_a_returned")) r.theta_a_returned = vec_from_json(j.at("theta_a_returned"));
    if (j.contains("theta_b_returned")) r.theta_b_returned = vec_from_json(j.at("theta_b_returned"));
    if (j.contains("oracle")) {
      r.oracle.theta_a = vec_from_json(j.at("oracle").at("theta_a"));
      r.oracle.theta_b = vec_from_json(j.at("oracle").at("theta_b"));
    }
    if (!t.rounds.empty() && r.round <= t.rounds.back().round)
      throw ConfigError("transcript line " + std::to_string(line_no) + ": round index not increasing");
    t.rounds.push_back(std::move(r));
  }
  if (!have_header) throw ConfigError("transcript: missing header line");
  return t;
}

void save_transcript(const std::string& path, const Transcript& t, bool include_oracle) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write transcript to " + path);
  write_transcript(out, t, include_oracle);
}

Transcript load_transcript(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open transcript " + path);
  return read_transcript(in);
}

}  // namespace vfl::logreg
