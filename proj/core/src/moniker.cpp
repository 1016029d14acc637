#include "fuchsim/moniker.hpp"

namespace fuchsim::topology {

Moniker Moniker::parse(std::string_view text) {
  if (text.empty() || text[0] != '/')
    throw MalformedMonikerError("moniker must start with '/'");
  Moniker m;
  if (text == "/") return m;
  size_t start = 1;
  while (start <= text.size()) {
    size_t end = text.find('/', start);
    std::string_view seg = end == std::string_view::npos
                               ? text.substr(start)
                               : text.substr(start, end - start);
    if (seg.empty())
      throw MalformedMonikerError("empty segment in moniker '" +
                                  std::string(text) + "'");
    m.segments_.emplace_back(seg);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return m;
}

Moniker Moniker::child(std::string_view name) const {
  if (name.empty() || name.find('/') != std::string_view::npos)
    throw MalformedMonikerError("invalid child segment '" + std::string(name) +
                                "'");
  Moniker m = *this;
  m.segments_.emplace_back(name);
  return m;
}

Moniker Moniker::parent() const {
  if (is_root()) throw MalformedMonikerError("root moniker has no parent");
  Moniker m = *this;
  m.segments_.pop_back();
  return m;
}

bool Moniker::is_prefix_of(const Moniker& other) const {
  if (segments_.size() > other.segments_.size()) return false;
  for (size_t i = 0; i < segments_.size(); i++) {
    if (segments_[i] != other.segments_[i]) return false;
  }
  return true;
}

std::string Moniker::render() const {
  if (segments_.empty()) return "/";
  std::string out;
  for (const std::string& seg : segments_) {
    out += '/';
    out += seg;
  }
  return out;
}

}  // namespace fuchsim::topology
