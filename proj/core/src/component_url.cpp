#include "fuchsim/component_url.hpp"

#include <cctype>

namespace fuchsim::topology {

namespace {

bool valid_scheme(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '+')
      return false;
  }
  return true;
}

}  // namespace

ComponentUrl ComponentUrl::parse(std::string_view text) {
  auto malformed = [&](const char* why) -> MalformedUrlError {
    return MalformedUrlError("malformed component url '" + std::string(text) +
                             "': " + why);
  };
  size_t scheme_end = text.find("://");
  if (scheme_end == std::string_view::npos) throw malformed("missing scheme");
  ComponentUrl url;
  url.scheme = std::string(text.substr(0, scheme_end));
  if (!valid_scheme(url.scheme)) throw malformed("invalid scheme");

  std::string_view rest = text.substr(scheme_end + 3);
  size_t slash = rest.find('/');
  if (slash == std::string_view::npos || slash == 0)
    throw malformed("missing repository");
  url.repository = std::string(rest.substr(0, slash));

  std::string_view tail = rest.substr(slash + 1);
  size_t hash = tail.find('#');
  if (hash == std::string_view::npos || hash == 0)
    throw malformed("missing package name");
  url.package = std::string(tail.substr(0, hash));
  url.fragment = std::string(tail.substr(hash + 1));
  if (url.fragment.empty()) throw malformed("missing manifest fragment");
  if (url.package.find('/') != std::string::npos)
    throw malformed("package name contains '/'");
  return url;
}

std::string ComponentUrl::render() const {
  return scheme + "://" + repository + "/" + package + "#" + fragment;
}

}  // namespace fuchsim::topology
