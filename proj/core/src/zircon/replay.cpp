#include <cstdlib>
#include <map>
#include <sstream>

#include "fuchsim/zircon/sim.hpp"

namespace fuchsim::zircon {

namespace {

struct Line {
  std::string op;
  std::map<std::string, std::string> args;
};

Line parse_line(const std::string& text) {
  std::string lhs = text;
  size_t arrow = text.find(" -> ");
  if (arrow == std::string::npos)
    throw ReplayError("trace line lacks '->': " + text);
  lhs = text.substr(0, arrow);

  std::istringstream in(lhs);
  std::string seq, op, token;
  if (!(in >> seq >> op)) throw ReplayError("malformed trace line: " + text);
  Line line;
  line.op = op;
  while (in >> token) {
    size_t eq = token.find('=');
    if (eq == std::string::npos)
      throw ReplayError("malformed trace argument '" + token + "'");
    line.args[token.substr(0, eq)] = token.substr(eq + 1);
  }
  return line;
}

uint64_t parse_u64(const Line& line, const std::string& key) {
  auto it = line.args.find(key);
  if (it == line.args.end())
    throw ReplayError("trace op '" + line.op + "' lacks '" + key + "'");
  return std::strtoull(it->second.c_str(), nullptr, 10);
}

HandleId parse_handle(const Line& line, const std::string& key) {
  auto it = line.args.find(key);
  if (it == line.args.end())
    throw ReplayError("trace op '" + line.op + "' lacks '" + key + "'");
  const std::string& v = it->second;
  size_t off = v.empty() ? 0 : (v[0] == 'h' ? 1 : 0);
  return std::strtoull(v.c_str() + off, nullptr, 10);
}

std::vector<uint8_t> parse_bytes(const Line& line, const std::string& key) {
  auto it = line.args.find(key);
  if (it == line.args.end())
    throw ReplayError("trace op '" + line.op + "' lacks '" + key + "'");
  const std::string& hex = it->second;
  if (hex == "-") return {};
  if (hex.size() % 2 != 0) throw ReplayError("odd hex payload");
  std::vector<uint8_t> out;
  out.reserve(hex.size() / 2);
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    throw ReplayError("invalid hex digit");
  };
  for (size_t i = 0; i < hex.size(); i += 2) {
    out.push_back(static_cast<uint8_t>((nibble(hex[i]) << 4) | nibble(hex[i + 1])));
  }
  return out;
}

std::vector<HandleId> parse_handle_ids(const Line& line,
                                       const std::string& key) {
  auto it = line.args.find(key);
  if (it == line.args.end())
    throw ReplayError("trace op '" + line.op + "' lacks '" + key + "'");
  const std::string& v = it->second;
  if (v.size() < 2 || v.front() != '[' || v.back() != ']')
    throw ReplayError("malformed handle list '" + v + "'");
  std::vector<HandleId> out;
  std::string body = v.substr(1, v.size() - 2);
  std::istringstream in(body);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(std::strtoull(item.c_str(), nullptr, 10));
  }
  return out;
}

ZxRights parse_rights_hex(const Line& line, const std::string& key) {
  auto it = line.args.find(key);
  if (it == line.args.end())
    throw ReplayError("trace op '" + line.op + "' lacks '" + key + "'");
  return ZxRights::from_bits(
      static_cast<uint16_t>(std::strtoul(it->second.c_str(), nullptr, 16)));
}

ZxRights parse_memory_rights(const Line& line, const std::string& key) {
  auto it = line.args.find(key);
  if (it == line.args.end())
    throw ReplayError("trace op '" + line.op + "' lacks '" + key + "'");
  ZxRights r;
  for (char c : it->second) {
    if (c == 'r') r = r.union_with({ZxRight::kRead});
    if (c == 'w') r = r.union_with({ZxRight::kWrite});
    if (c == 'x') r = r.union_with({ZxRight::kExecute});
  }
  return r;
}

std::string arg_string(const Line& line, const std::string& key) {
  auto it = line.args.find(key);
  if (it == line.args.end())
    throw ReplayError("trace op '" + line.op + "' lacks '" + key + "'");
  return it->second;
}

}  // namespace

Simulator replay_trace(const std::string& trace_text,
                       std::array<uint8_t, 32> cprng_seed,
                       uint64_t reseed_interval) {
  Simulator sim(cprng_seed, reseed_interval);
  std::istringstream in(trace_text);
  std::string raw;
  while (std::getline(in, raw)) {
    if (raw.empty()) continue;
    Line line = parse_line(raw);
    const std::string& op = line.op;
    if (op == "process_create") {
      sim.process_create(arg_string(line, "name"));
    } else if (op == "channel_create") {
      sim.channel_create(parse_u64(line, "proc"));
    } else if (op == "channel_write") {
      sim.channel_write(parse_handle(line, "h"), parse_bytes(line, "bytes"),
                        parse_handle_ids(line, "handles"));
    } else if (op == "channel_read") {
      sim.channel_read(parse_handle(line, "h"), parse_u64(line, "proc"));
    } else if (op == "handle_duplicate") {
      sim.handle_duplicate(parse_handle(line, "h"),
                           parse_rights_hex(line, "rights"));
    } else if (op == "handle_close") {
      sim.handle_close(parse_handle(line, "h"));
    } else if (op == "socket_create") {
      sim.socket_create(parse_u64(line, "proc"), parse_u64(line, "capacity"));
    } else if (op == "socket_write") {
      sim.socket_write(parse_handle(line, "h"), parse_bytes(line, "bytes"));
    } else if (op == "socket_read") {
      sim.socket_read(parse_handle(line, "h"), parse_u64(line, "n"));
    } else if (op == "fifo_create") {
      sim.fifo_create(parse_u64(line, "proc"), parse_u64(line, "elem"),
                      parse_u64(line, "depth"));
    } else if (op == "fifo_write") {
      sim.fifo_write(parse_handle(line, "h"), parse_bytes(line, "bytes"));
    } else if (op == "fifo_read") {
      sim.fifo_read(parse_handle(line, "h"), parse_u64(line, "max"));
    } else if (op == "vmo_create") {
      sim.vmo_create(parse_u64(line, "proc"), parse_u64(line, "size"));
    } else if (op == "vmo_write") {
      sim.vmo_write(parse_handle(line, "h"), parse_u64(line, "off"),
                    parse_bytes(line, "bytes"));
    } else if (op == "vmo_read") {
      sim.vmo_read(parse_handle(line, "h"), parse_u64(line, "off"),
                   parse_u64(line, "n"));
    } else if (op == "vmar_allocate") {
      sim.vmar_allocate(parse_handle(line, "parent"), parse_u64(line, "off"),
                        parse_u64(line, "size"),
                        parse_memory_rights(line, "rights"));
    } else if (op == "cprng_draw") {
      sim.cprng_draw(parse_u64(line, "n"));
    } else {
      throw ReplayError("unknown trace op '" + op + "'");
    }
    if (sim.trace().empty() || sim.trace().back() != raw) {
      throw ReplayError("replay diverged at: " + raw);
    }
  }
  return sim;
}

}  // namespace fuchsim::zircon
