#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "semsum/providers.hpp"

namespace golden {

struct Block {
  std::string role;
  std::string content;
};

inline std::string read_file(const std::string& name) {
  std::ifstream in(std::string(SEMSUM_GOLDEN_DIR) + "/" + name, std::ios::binary);
  if (!in) throw std::runtime_error("missing golden file " + name);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (std::size_t at = s.find(from); at != std::string::npos; at = s.find(from, at + to.size())) {
    s.replace(at, from.size(), to);
  }
}

// A block starts at a "=== <role>" line and its content runs to the newline
// before the next marker (or the end of the file).
inline std::vector<Block> parse(const std::string& file) {
  std::vector<Block> blocks;
  const std::string marker = "=== ";
  std::size_t pos = 0;
  while (pos < file.size()) {
    if (file.compare(pos, marker.size(), marker) != 0) {
      throw std::runtime_error("golden block must start with a marker");
    }
    const std::size_t eol = file.find('\n', pos);
    Block b;
    b.role = file.substr(pos + marker.size(), eol - pos - marker.size());
    const std::size_t start = eol + 1;
    const std::size_t next = file.find("\n" + marker, start);
    const std::size_t end = next == std::string::npos ? file.size() - 1 : next;
    b.content = file.substr(start, end - start);
    blocks.push_back(b);
    pos = next == std::string::npos ? file.size() : next + 1;
  }
  return blocks;
}

/// Golden file rendered with its placeholders filled in.
inline std::vector<Block> load(const std::string& name,
                               const std::vector<std::pair<std::string, std::string>>& slots) {
  auto blocks = parse(read_file(name));
  for (auto& b : blocks) {
    for (const auto& [k, v] : slots) replace_all(b.content, "{" + k + "}", v);
  }
  return blocks;
}

inline std::vector<Block> blocks_of(const semsum::ChatRequest& r) {
  std::vector<Block> out;
  for (const auto& m : r.messages) out.push_back({std::string(semsum::to_string(m.role)), m.content});
  return out;
}

/// Byte-for-byte comparison; returns a description of the first difference.
inline std::string diff(const std::vector<Block>& want, const std::vector<Block>& got) {
  if (want.size() != got.size()) {
    return "message count " + std::to_string(got.size()) + " != " + std::to_string(want.size());
  }
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (want[i].role != got[i].role) return "role of message " + std::to_string(i);
    if (want[i].content != got[i].content) {
      return "content of message " + std::to_string(i) + ":\n[" + got[i].content +
             "]\nexpected:\n[" + want[i].content + "]";
    }
  }
  return {};
}

}  // namespace golden
