#include "fuchsim/manifest.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <sstream>
#include <utility>

namespace fuchsim::manifest {

namespace {

const std::array<std::pair<std::string, CapabilityType>, 7> kTypeNames = {{
    {"directory", CapabilityType::kDirectory},
    {"event", CapabilityType::kEvent},
    {"protocol", CapabilityType::kProtocol},
    {"resolver", CapabilityType::kResolver},
    {"runner", CapabilityType::kRunner},
    {"service", CapabilityType::kService},
    {"storage", CapabilityType::kStorage},
}};

}  // namespace

const std::string& capability_type_name(CapabilityType t) {
  for (const auto& [name, type] : kTypeNames) {
    if (type == t) return name;
  }
  static const std::string unknown = "?";
  return unknown;
}

std::optional<CapabilityType> capability_type_from_name(std::string_view name) {
  for (const auto& [n, type] : kTypeNames) {
    if (n == name) return type;
  }
  return std::nullopt;
}

std::string SourceRef::render() const {
  switch (kind) {
    case Kind::kParent: return "parent";
    case Kind::kSelf: return "self";
    case Kind::kChild: return "#" + child_name;
  }
  return "?";
}

std::string Diagnostic::render(std::string_view path) const {
  std::ostringstream os;
  os << code << " " << path << " " << pos.line << ":" << pos.col << " "
     << message;
  return os.str();
}

namespace {

using json5::Value;

[[noreturn]] void syntax_error(const Value& at, const std::string& msg) {
  throw SyntaxError(at.pos(), msg);
}

std::string require_string(const Value& v, const char* what) {
  if (!v.is_string()) syntax_error(v, std::string(what) + " must be a string");
  return v.as_string();
}

std::vector<std::string> require_string_array(const Value& v,
                                              const char* what) {
  if (!v.is_array())
    syntax_error(v, std::string(what) + " must be an array of strings");
  std::vector<std::string> out;
  for (const Value& e : v.elements()) out.push_back(require_string(e, what));
  return out;
}

RightsSet decode_rights(const Value& v) {
  return expand_rights(require_string_array(v, "rights"));
}

SourceRef decode_source_ref(const Value& v) {
  std::string s = require_string(v, "from");
  if (s == "parent") return SourceRef::parent();
  if (s == "self") return SourceRef::self();
  if (s.size() > 1 && s[0] == '#') return SourceRef::child(s.substr(1));
  syntax_error(v, "source must be 'parent', 'self', or '#child'");
}

// A declaration object names its capability via exactly one of the seven
// type keys: { directory: "data", rights: [...], path: "..." }.
struct DeclHead {
  CapabilityType type;
  std::string name;
};

DeclHead decode_decl_head(const Value& obj, const char* section) {
  std::optional<DeclHead> head;
  for (const auto& [key, val] : obj.members()) {
    auto type = capability_type_from_name(key);
    if (!type) continue;
    if (head)
      syntax_error(obj, std::string(section) +
                            " declaration names more than one capability type");
    head = DeclHead{*type, require_string(val, "capability name")};
  }
  if (!head) {
    // Emit the dedicated error when the object looks like a typed decl
    // with a misspelled type (single non-attribute key).
    for (const auto& [key, val] : obj.members()) {
      if (key != "rights" && key != "path" && key != "from" && key != "to") {
        throw UnknownCapabilityTypeError("unknown capability type '" + key +
                                         "'");
      }
    }
    syntax_error(obj, std::string(section) +
                          " declaration names no capability type");
  }
  return *head;
}

void reject_unknown_keys(const Value& obj,
                         std::initializer_list<std::string_view> allowed,
                         const char* section) {
  for (const auto& [key, val] : obj.members()) {
    if (capability_type_from_name(key)) continue;
    bool ok = false;
    for (std::string_view a : allowed) {
      if (key == a) ok = true;
    }
    if (!ok)
      syntax_error(val, "unknown key '" + key + "' in " + section +
                            " declaration");
  }
}

CapabilityDecl decode_capability(const Value& obj) {
  if (!obj.is_object()) syntax_error(obj, "capability declaration must be an object");
  DeclHead head = decode_decl_head(obj, "capability");
  reject_unknown_keys(obj, {"rights", "path"}, "capability");
  CapabilityDecl d;
  d.type = head.type;
  d.name = head.name;
  d.pos = obj.pos();
  if (const Value* r = obj.find("rights")) d.rights = decode_rights(*r);
  if (const Value* p = obj.find("path")) d.path = require_string(*p, "path");
  return d;
}

UseDecl decode_use(const Value& obj) {
  if (!obj.is_object()) syntax_error(obj, "use declaration must be an object");
  DeclHead head = decode_decl_head(obj, "use");
  reject_unknown_keys(obj, {"rights", "path", "from"}, "use");
  UseDecl d;
  d.type = head.type;
  d.name = head.name;
  d.pos = obj.pos();
  if (const Value* r = obj.find("rights")) d.rights = decode_rights(*r);
  if (const Value* p = obj.find("path")) d.path = require_string(*p, "path");
  if (const Value* f = obj.find("from")) {
    SourceRef from = decode_source_ref(*f);
    if (from.kind != SourceRef::Kind::kParent)
      syntax_error(*f, "use source must be 'parent'");
    d.from = from;
  }
  return d;
}

OfferDecl decode_offer(const Value& obj) {
  if (!obj.is_object()) syntax_error(obj, "offer declaration must be an object");
  DeclHead head = decode_decl_head(obj, "offer");
  reject_unknown_keys(obj, {"rights", "from", "to"}, "offer");
  OfferDecl d;
  d.type = head.type;
  d.name = head.name;
  d.pos = obj.pos();
  if (const Value* r = obj.find("rights")) d.rights = decode_rights(*r);
  const Value* f = obj.find("from");
  if (!f) syntax_error(obj, "offer declaration requires 'from'");
  d.from = decode_source_ref(*f);
  const Value* t = obj.find("to");
  if (!t) syntax_error(obj, "offer declaration requires 'to'");
  for (const std::string& ref : require_string_array(*t, "to")) {
    if (ref.size() < 2 || ref[0] != '#')
      syntax_error(*t, "offer target must be a '#name' reference");
    d.to.push_back(ref);
  }
  if (d.to.empty()) syntax_error(*t, "offer target list is empty");
  return d;
}

ExposeDecl decode_expose(const Value& obj) {
  if (!obj.is_object()) syntax_error(obj, "expose declaration must be an object");
  DeclHead head = decode_decl_head(obj, "expose");
  reject_unknown_keys(obj, {"rights", "from"}, "expose");
  ExposeDecl d;
  d.type = head.type;
  d.name = head.name;
  d.pos = obj.pos();
  if (const Value* r = obj.find("rights")) d.rights = decode_rights(*r);
  const Value* f = obj.find("from");
  if (!f) syntax_error(obj, "expose declaration requires 'from'");
  d.from = decode_source_ref(*f);
  if (d.from.kind == SourceRef::Kind::kParent)
    syntax_error(*f, "expose source must be 'self' or '#child'");
  return d;
}

ChildDecl decode_child(const Value& obj) {
  if (!obj.is_object()) syntax_error(obj, "child declaration must be an object");
  ChildDecl d;
  d.pos = obj.pos();
  const Value* name = obj.find("name");
  if (!name) syntax_error(obj, "child declaration requires 'name'");
  d.name = require_string(*name, "child name");
  const Value* url = obj.find("url");
  if (!url) syntax_error(obj, "child declaration requires 'url'");
  d.url = require_string(*url, "child url");
  for (const auto& [key, val] : obj.members()) {
    if (key != "name" && key != "url")
      syntax_error(val, "unknown key '" + key + "' in child declaration");
  }
  return d;
}

CollectionDecl decode_collection(const Value& obj) {
  if (!obj.is_object())
    syntax_error(obj, "collection declaration must be an object");
  CollectionDecl d;
  d.pos = obj.pos();
  const Value* name = obj.find("name");
  if (!name) syntax_error(obj, "collection declaration requires 'name'");
  d.name = require_string(*name, "collection name");
  for (const auto& [key, val] : obj.members()) {
    if (key != "name" && key != "durability")
      syntax_error(val, "unknown key '" + key + "' in collection declaration");
  }
  return d;
}

ProgramBlock decode_program(const Value& obj) {
  if (!obj.is_object()) syntax_error(obj, "program must be an object");
  ProgramBlock p;
  p.pos = obj.pos();
  const Value* runner = obj.find("runner");
  if (!runner) syntax_error(obj, "program requires 'runner'");
  p.runner = require_string(*runner, "runner");
  if (p.runner.empty()) syntax_error(*runner, "runner must be nonempty");
  if (const Value* b = obj.find("binary"))
    p.binary = require_string(*b, "binary");
  if (const Value* a = obj.find("args"))
    p.args = require_string_array(*a, "args");
  for (const auto& [key, val] : obj.members()) {
    if (key != "runner" && key != "binary" && key != "args")
      syntax_error(val, "unknown key '" + key + "' in program block");
  }
  return p;
}

void check_unique_names(const ComponentManifest& m) {
  std::set<std::string> names;
  for (const ChildDecl& c : m.children) {
    if (!names.insert(c.name).second)
      throw DuplicateChildNameError("duplicate child name '" + c.name + "'");
  }
  for (const CollectionDecl& c : m.collections) {
    if (!names.insert(c.name).second)
      throw DuplicateChildNameError("duplicate collection name '" + c.name +
                                    "'");
  }
}

}  // namespace

ComponentManifest parse_manifest(std::string_view text) {
  Value doc = [&] {
    try {
      return json5::parse(text);
    } catch (const json5::ParseError& e) {
      throw SyntaxError(e.pos(), e.what());
    }
  }();
  if (!doc.is_object())
    throw SyntaxError(doc.pos(), "manifest document must be an object");

  ComponentManifest m;
  for (const auto& [key, val] : doc.members()) {
    if (key == "include") {
      m.includes = require_string_array(val, "include");
    } else if (key == "program") {
      m.program = decode_program(val);
    } else if (key == "capabilities") {
      if (!val.is_array()) syntax_error(val, "capabilities must be an array");
      for (const Value& e : val.elements())
        m.capabilities.push_back(decode_capability(e));
    } else if (key == "use") {
      if (!val.is_array()) syntax_error(val, "use must be an array");
      for (const Value& e : val.elements()) m.uses.push_back(decode_use(e));
    } else if (key == "offer") {
      if (!val.is_array()) syntax_error(val, "offer must be an array");
      for (const Value& e : val.elements()) m.offers.push_back(decode_offer(e));
    } else if (key == "expose") {
      if (!val.is_array()) syntax_error(val, "expose must be an array");
      for (const Value& e : val.elements())
        m.exposes.push_back(decode_expose(e));
    } else if (key == "children") {
      if (!val.is_array()) syntax_error(val, "children must be an array");
      for (const Value& e : val.elements())
        m.children.push_back(decode_child(e));
    } else if (key == "collections") {
      if (!val.is_array()) syntax_error(val, "collections must be an array");
      for (const Value& e : val.elements())
        m.collections.push_back(decode_collection(e));
    } else {
      syntax_error(val, "unknown manifest section '" + key + "'");
    }
  }
  check_unique_names(m);
  return m;
}

namespace {

void write_quoted(std::ostringstream& os, const std::string& s) {
  os << '"';
  for (char c : s) {
    switch (c) {
      case '"': os << "\\\""; break;
      case '\\': os << "\\\\"; break;
      case '\n': os << "\\n"; break;
      case '\r': os << "\\r"; break;
      case '\t': os << "\\t"; break;
      default: os << c;
    }
  }
  os << '"';
}

void write_rights(std::ostringstream& os, RightsSet set) {
  os << "rights: [ ";
  bool first = true;
  for (const std::string& tok : rights_tokens(set)) {
    if (!first) os << ", ";
    write_quoted(os, tok);
    first = false;
  }
  os << " ]";
}

void write_head(std::ostringstream& os, CapabilityType type,
                const std::string& name) {
  os << capability_type_name(type) << ": ";
  write_quoted(os, name);
}

}  // namespace

std::string serialize_manifest(const ComponentManifest& m) {
  std::ostringstream os;
  os << "{\n";
  if (!m.includes.empty()) {
    os << "    include: [ ";
    for (size_t i = 0; i < m.includes.size(); i++) {
      if (i) os << ", ";
      write_quoted(os, m.includes[i]);
    }
    os << " ],\n";
  }
  if (m.program) {
    os << "    program: {\n";
    os << "        runner: ";
    write_quoted(os, m.program->runner);
    os << ",\n";
    if (!m.program->binary.empty()) {
      os << "        binary: ";
      write_quoted(os, m.program->binary);
      os << ",\n";
    }
    if (!m.program->args.empty()) {
      os << "        args: [ ";
      for (size_t i = 0; i < m.program->args.size(); i++) {
        if (i) os << ", ";
        write_quoted(os, m.program->args[i]);
      }
      os << " ],\n";
    }
    os << "    },\n";
  }
  if (!m.capabilities.empty()) {
    os << "    capabilities: [\n";
    for (const CapabilityDecl& d : m.capabilities) {
      os << "        { ";
      write_head(os, d.type, d.name);
      if (d.rights) {
        os << ", ";
        write_rights(os, *d.rights);
      }
      if (d.path) {
        os << ", path: ";
        write_quoted(os, *d.path);
      }
      os << " },\n";
    }
    os << "    ],\n";
  }
  if (!m.uses.empty()) {
    os << "    use: [\n";
    for (const UseDecl& d : m.uses) {
      os << "        { ";
      write_head(os, d.type, d.name);
      if (d.rights) {
        os << ", ";
        write_rights(os, *d.rights);
      }
      if (d.path) {
        os << ", path: ";
        write_quoted(os, *d.path);
      }
      os << " },\n";
    }
    os << "    ],\n";
  }
  if (!m.offers.empty()) {
    os << "    offer: [\n";
    for (const OfferDecl& d : m.offers) {
      os << "        { ";
      write_head(os, d.type, d.name);
      if (d.rights) {
        os << ", ";
        write_rights(os, *d.rights);
      }
      os << ", from: ";
      write_quoted(os, d.from.render());
      os << ", to: [ ";
      for (size_t i = 0; i < d.to.size(); i++) {
        if (i) os << ", ";
        write_quoted(os, d.to[i]);
      }
      os << " ] },\n";
    }
    os << "    ],\n";
  }
  if (!m.exposes.empty()) {
    os << "    expose: [\n";
    for (const ExposeDecl& d : m.exposes) {
      os << "        { ";
      write_head(os, d.type, d.name);
      if (d.rights) {
        os << ", ";
        write_rights(os, *d.rights);
      }
      os << ", from: ";
      write_quoted(os, d.from.render());
      os << " },\n";
    }
    os << "    ],\n";
  }
  if (!m.children.empty()) {
    os << "    children: [\n";
    for (const ChildDecl& d : m.children) {
      os << "        { name: ";
      write_quoted(os, d.name);
      os << ", url: ";
      write_quoted(os, d.url);
      os << " },\n";
    }
    os << "    ],\n";
  }
  if (!m.collections.empty()) {
    os << "    collections: [\n";
    for (const CollectionDecl& d : m.collections) {
      os << "        { name: ";
      write_quoted(os, d.name);
      os << " },\n";
    }
    os << "    ],\n";
  }
  os << "}\n";
  return os.str();
}

std::vector<Diagnostic> validate_manifest(const ComponentManifest& m) {
  std::vector<Diagnostic> out;
  auto add = [&out](std::string code, std::string subject, SourcePos pos,
                    std::string message) {
    out.push_back(Diagnostic{std::move(code), std::move(subject), pos,
                             std::move(message)});
  };

  std::set<std::string> child_names;
  std::set<std::string> collection_names;
  std::set<std::string> seen;
  for (const ChildDecl& c : m.children) {
    if (!seen.insert(c.name).second) {
      add("DuplicateChildName", c.name, c.pos,
          "child name '" + c.name + "' declared more than once");
    }
    child_names.insert(c.name);
  }
  for (const CollectionDecl& c : m.collections) {
    if (!seen.insert(c.name).second) {
      add("DuplicateCollectionName", c.name, c.pos,
          "collection name '" + c.name + "' collides with another declaration");
    }
    collection_names.insert(c.name);
  }

  // Capability names unique per type.
  std::set<std::pair<CapabilityType, std::string>> cap_names;
  for (const CapabilityDecl& d : m.capabilities) {
    if (!cap_names.insert({d.type, d.name}).second) {
      add("DuplicateCapabilityName", d.name, d.pos,
          "capability '" + d.name + "' of type " +
              capability_type_name(d.type) + " declared more than once");
    }
    if (d.type == CapabilityType::kDirectory) {
      if (!d.rights)
        add("MissingRights", d.name, d.pos,
            "directory capability '" + d.name + "' carries no rights");
      if (!d.path)
        add("MissingPath", d.name, d.pos,
            "directory capability '" + d.name + "' carries no path");
    }
  }

  auto check_source = [&](const SourceRef& from, SourcePos pos,
                          const char* kind) {
    if (from.kind == SourceRef::Kind::kChild &&
        child_names.count(from.child_name) == 0) {
      add("UnresolvedSourceRef", "#" + from.child_name, pos,
          std::string(kind) + " source '#" + from.child_name +
              "' names no declared child");
    }
  };
  for (const OfferDecl& d : m.offers) {
    check_source(d.from, d.pos, "offer");
    for (const std::string& target : d.to) {
      std::string name = target.substr(1);
      if (child_names.count(name) == 0 && collection_names.count(name) == 0) {
        add("UnresolvedTargetRef", target, d.pos,
            "offer target '" + target +
                "' names no declared child or collection");
      }
    }
  }
  for (const ExposeDecl& d : m.exposes) check_source(d.from, d.pos, "expose");

  return out;
}

namespace {

ComponentManifest merge_one(const ComponentManifest& m,
                            const IncludeLoader& loader,
                            std::vector<std::string>& chain) {
  ComponentManifest merged;
  for (const std::string& path : m.includes) {
    if (std::find(chain.begin(), chain.end(), path) != chain.end())
      throw IncludeCycleError("include cycle through '" + path + "'");
    std::optional<std::string> text = loader(path);
    if (!text) throw IncludeNotFoundError("include '" + path + "' not found");
    chain.push_back(path);
    ComponentManifest shard = merge_one(parse_manifest(*text), loader, chain);
    chain.pop_back();

    auto append = [](auto& dst, const auto& src) {
      dst.insert(dst.end(), src.begin(), src.end());
    };
    append(merged.capabilities, shard.capabilities);
    append(merged.uses, shard.uses);
    append(merged.offers, shard.offers);
    append(merged.exposes, shard.exposes);
    append(merged.children, shard.children);
    append(merged.collections, shard.collections);
    if (!merged.program && shard.program) merged.program = shard.program;
  }

  // Included sections first, then the including manifest's own.
  auto append = [](auto& dst, const auto& src) {
    dst.insert(dst.end(), src.begin(), src.end());
  };
  append(merged.capabilities, m.capabilities);
  append(merged.uses, m.uses);
  append(merged.offers, m.offers);
  append(merged.exposes, m.exposes);
  append(merged.children, m.children);
  append(merged.collections, m.collections);
  if (m.program) merged.program = m.program;
  return merged;
}

}  // namespace

ComponentManifest merge_includes(const ComponentManifest& m,
                                 const IncludeLoader& loader) {
  if (m.includes.empty()) return m;
  std::vector<std::string> chain;
  return merge_one(m, loader, chain);
}

}  // namespace fuchsim::manifest
