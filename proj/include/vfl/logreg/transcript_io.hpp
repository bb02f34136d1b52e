#pragma once

#include "vfl/logreg/protocol.hpp"

#include <iosfwd>
#include <string>

namespace vfl::logreg {

// Line-delimited JSON: one header line (public key, learning rate, flags),
// then one line per round. Ciphertexts are hex strings under the header's
// key_id. Oracle snapshots are written under "oracle" when requested.
void write_transcript(std::ostream& out, const Transcript& t, bool include_oracle = true);
Transcript read_transcript(std::istream& in);

void save_transcript(const std::string& path, const Transcript& t, bool include_oracle = true);
Transcript load_transcript(const std::string& path);

}  // namespace vfl::logreg
