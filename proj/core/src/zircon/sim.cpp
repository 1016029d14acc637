#include "fuchsim/zircon/sim.hpp"

#include <algorithm>
#include <sstream>

namespace fuchsim::zircon {

const std::string& status_name(ZxStatus s) {
  static const std::string names[] = {
      "Ok",          "AccessDenied", "BadHandle",        "BadProcess",
      "WouldBlock",  "Full",         "InvalidArgs",      "RightsEscalation",
      "NotOwner",    "OutOfRange",   "Overlap",
  };
  return names[static_cast<int>(s)];
}

const std::string& object_kind_name(ObjectKind k) {
  static const std::string names[] = {"process", "channel", "socket",
                                      "fifo",    "vmo",     "vmar"};
  return names[static_cast<int>(k)];
}

namespace {

const ZxRights kTransportDefault = {
    ZxRight::kDuplicate, ZxRight::kTransfer, ZxRight::kRead, ZxRight::kWrite,
    ZxRight::kSignal,    ZxRight::kWait,     ZxRight::kInspect,
};

const ZxRights kVmoDefault = kTransportDefault.union_with({ZxRight::kMap});

const ZxRights kVmarBase = {ZxRight::kDuplicate, ZxRight::kMap,
                            ZxRight::kInspect, ZxRight::kDestroy};

const ZxRights kMemoryRights = {ZxRight::kRead, ZxRight::kWrite,
                                ZxRight::kExecute};

std::string hex_encode(const std::vector<uint8_t>& bytes) {
  if (bytes.empty()) return "-";
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (uint8_t b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xF]);
  }
  return out;
}

std::string handle_list(const std::vector<HandleId>& handles) {
  std::string out = "[";
  for (size_t i = 0; i < handles.size(); i++) {
    if (i) out.push_back(',');
    out += std::to_string(handles[i]);
  }
  out.push_back(']');
  return out;
}

std::string memory_rights_str(ZxRights r) {
  std::string out;
  if (r.contains(ZxRight::kRead)) out.push_back('r');
  if (r.contains(ZxRight::kWrite)) out.push_back('w');
  if (r.contains(ZxRight::kExecute)) out.push_back('x');
  return out.empty() ? "-" : out;
}

std::string rights_hex(ZxRights r) {
  char buf[5];
  std::snprintf(buf, sizeof(buf), "%04x", r.bits());
  return buf;
}

}  // namespace

Simulator::Simulator() : Simulator(std::array<uint8_t, 32>{}, Cprng::kDefaultReseedInterval) {}

Simulator::Simulator(std::array<uint8_t, 32> cprng_seed,
                     uint64_t reseed_interval)
    : cprng_(cprng_seed, reseed_interval, make_seeded_entropy(cprng_seed)) {}

Simulator::KernelObject& Simulator::new_object(ObjectKind kind) {
  ObjectId id = ++object_seq_;
  KernelObject obj;
  obj.id = id;
  obj.kind = kind;
  switch (kind) {
    case ObjectKind::kProcess: obj.state = ProcessState{}; break;
    case ObjectKind::kChannel: obj.state = ChannelState{}; break;
    case ObjectKind::kSocket: obj.state = SocketState{}; break;
    case ObjectKind::kFifo: obj.state = FifoState{}; break;
    case ObjectKind::kVmo: obj.state = VmoState{}; break;
    case ObjectKind::kVmar: obj.state = VmarState{}; break;
  }
  return objects_.emplace(id, std::move(obj)).first->second;
}

HandleId Simulator::new_handle(ObjectId object_id, ZxRights rights,
                               ProcessId owner, int endpoint) {
  HandleId id = ++handle_seq_;
  handles_[id] = Handle{id, object_id, rights, owner, endpoint};
  objects_.at(object_id).refcount++;
  return id;
}

Simulator::Handle* Simulator::live_handle(HandleId h) {
  auto it = handles_.find(h);
  return it == handles_.end() ? nullptr : &it->second;
}

Simulator::KernelObject* Simulator::object(ObjectId id) {
  auto it = objects_.find(id);
  return it == objects_.end() ? nullptr : &it->second;
}

const Simulator::KernelObject* Simulator::object(ObjectId id) const {
  auto it = objects_.find(id);
  return it == objects_.end() ? nullptr : &it->second;
}

bool Simulator::process_live(ProcessId pid) const {
  const KernelObject* obj = object(pid);
  return obj && obj->kind == ObjectKind::kProcess;
}

void Simulator::drop_handle(HandleId h) {
  auto it = handles_.find(h);
  if (it == handles_.end()) return;
  ObjectId obj = it->second.object;
  handles_.erase(it);
  release_object(obj);
}

void Simulator::release_object(ObjectId id) {
  KernelObject* obj = object(id);
  if (!obj) return;
  if (obj->refcount > 0) obj->refcount--;
  if (obj->refcount == 0 && !obj->retained) reclaim(id);
}

void Simulator::reclaim(ObjectId id) {
  auto it = objects_.find(id);
  if (it == objects_.end()) return;
  KernelObject obj = std::move(it->second);
  objects_.erase(it);

  if (obj.kind == ObjectKind::kChannel) {
    // Queued in-transit handles die with the channel.
    auto& chan = std::get<ChannelState>(obj.state);
    for (auto& queue : chan.incoming) {
      for (Message& msg : queue) {
        for (HandleId h : msg.handles) drop_handle(h);
      }
    }
  } else if (obj.kind == ObjectKind::kVmar) {
    // Children were retained by this node; now they stand on their own
    // refcounts.
    auto& vmar = std::get<VmarState>(obj.state);
    for (ObjectId child_id : vmar.children) {
      KernelObject* child = object(child_id);
      if (!child) continue;
      child->retained = false;
      if (child->refcount == 0) reclaim(child_id);
    }
  }
}

void Simulator::record(const std::string& line) {
  trace_.push_back(std::to_string(trace_seq_++) + " " + line);
}

ProcessInfo Simulator::process_create(const std::string& name) {
  if (name.empty() ||
      name.find_first_of(" \t\n") != std::string::npos) {
    throw std::invalid_argument("process name must be nonempty and contain no whitespace");
  }
  KernelObject& proc = new_object(ObjectKind::kProcess);
  proc.retained = true;  // process teardown is out of scope
  KernelObject& vmar = new_object(ObjectKind::kVmar);
  auto& vmar_state = std::get<VmarState>(vmar.state);
  vmar_state.base = 0;
  vmar_state.size = kRootVmarSize;
  vmar_state.memory_rights = kMemoryRights;
  std::get<ProcessState>(proc.state).name = name;
  std::get<ProcessState>(proc.state).root_vmar = vmar.id;

  ZxRights handle_rights = kVmarBase.union_with(
      {ZxRight::kRead, ZxRight::kWrite, ZxRight::kExecute});
  HandleId vmar_handle = new_handle(vmar.id, handle_rights, proc.id);

  record("process_create name=" + name + " -> pid=" + std::to_string(proc.id) +
         " vmar=h" + std::to_string(vmar_handle));
  return ProcessInfo{proc.id, vmar_handle};
}

ZxResult<HandlePair> Simulator::channel_create(ProcessId proc) {
  std::string args = "channel_create proc=" + std::to_string(proc);
  if (!process_live(proc)) {
    record(args + " -> err=" + status_name(ZxStatus::kBadProcess));
    return ZxStatus::kBadProcess;
  }
  KernelObject& chan = new_object(ObjectKind::kChannel);
  HandleId h0 = new_handle(chan.id, kTransportDefault, proc, 0);
  HandleId h1 = new_handle(chan.id, kTransportDefault, proc, 1);
  record(args + " -> h" + std::to_string(h0) + ",h" + std::to_string(h1));
  return HandlePair{h0, h1};
}

ZxResult<std::monostate> Simulator::channel_write(
    HandleId h, const std::vector<uint8_t>& bytes,
    const std::vector<HandleId>& transfer) {
  std::string args = "channel_write h=" + std::to_string(h) +
                     " bytes=" + hex_encode(bytes) +
                     " handles=" + handle_list(transfer);
  auto fail = [&](ZxStatus s) -> ZxResult<std::monostate> {
    record(args + " -> err=" + status_name(s));
    return s;
  };

  Handle* handle = live_handle(h);
  if (!handle) return fail(ZxStatus::kBadHandle);
  if (!handle->owner) return fail(ZxStatus::kNotOwner);
  KernelObject* obj = object(handle->object);
  if (obj->kind != ObjectKind::kChannel) return fail(ZxStatus::kInvalidArgs);
  if (!handle->rights.contains(ZxRight::kWrite))
    return fail(ZxStatus::kAccessDenied);

  // All transferred handles are validated before anything mutates.
  ProcessId caller = *handle->owner;
  for (size_t i = 0; i < transfer.size(); i++) {
    Handle* t = live_handle(transfer[i]);
    if (!t) return fail(ZxStatus::kBadHandle);
    if (!t->owner || *t->owner != caller) return fail(ZxStatus::kNotOwner);
    if (!t->rights.contains(ZxRight::kTransfer))
      return fail(ZxStatus::kAccessDenied);
    for (size_t j = 0; j < i; j++) {
      if (transfer[j] == transfer[i]) return fail(ZxStatus::kInvalidArgs);
    }
  }

  for (HandleId t : transfer) live_handle(t)->owner = std::nullopt;
  auto& chan = std::get<ChannelState>(obj->state);
  chan.incoming[1 - handle->endpoint].push_back(Message{bytes, transfer});
  record(args + " -> ok");
  return std::monostate{};
}

ZxResult<Message> Simulator::channel_read(HandleId h, ProcessId reader) {
  std::string args = "channel_read h=" + std::to_string(h) +
                     " proc=" + std::to_string(reader);
  auto fail = [&](ZxStatus s) -> ZxResult<Message> {
    record(args + " -> err=" + status_name(s));
    return s;
  };

  Handle* handle = live_handle(h);
  if (!handle) return fail(ZxStatus::kBadHandle);
  if (!process_live(reader)) return fail(ZxStatus::kBadProcess);
  KernelObject* obj = object(handle->object);
  if (obj->kind != ObjectKind::kChannel) return fail(ZxStatus::kInvalidArgs);
  if (!handle->owner || *handle->owner != reader)
    return fail(ZxStatus::kAccessDenied);
  if (!handle->rights.contains(ZxRight::kRead))
    return fail(ZxStatus::kAccessDenied);

  auto& queue = std::get<ChannelState>(obj->state).incoming[handle->endpoint];
  if (queue.empty()) return fail(ZxStatus::kWouldBlock);
  Message msg = std::move(queue.front());
  queue.pop_front();
  // Rights ride through transit verbatim; only ownership changes.
  for (HandleId t : msg.handles) live_handle(t)->owner = reader;
  record(args + " -> bytes=" + hex_encode(msg.bytes) +
         " handles=" + handle_list(msg.handles));
  return msg;
}

ZxResult<HandleId> Simulator::handle_duplicate(HandleId h, ZxRights requested) {
  std::string args = "handle_duplicate h=" + std::to_string(h) +
                     " rights=" + rights_hex(requested);
  auto fail = [&](ZxStatus s) -> ZxResult<HandleId> {
    record(args + " -> err=" + status_name(s));
    return s;
  };

  Handle* handle = live_handle(h);
  if (!handle) return fail(ZxStatus::kBadHandle);
  if (!handle->owner) return fail(ZxStatus::kBadHandle);
  if (!handle->rights.contains(ZxRight::kDuplicate))
    return fail(ZxStatus::kAccessDenied);
  // A copy can hold at most the rights of the original.
  if (!requested.subset_of(handle->rights))
    return fail(ZxStatus::kRightsEscalation);

  HandleId dup =
      new_handle(handle->object, requested, *handle->owner, handle->endpoint);
  record(args + " -> h" + std::to_string(dup));
  return dup;
}

ZxResult<std::monostate> Simulator::handle_close(HandleId h) {
  std::string args = "handle_close h=" + std::to_string(h);
  Handle* handle = live_handle(h);
  if (!handle || !handle->owner) {
    record(args + " -> err=" + status_name(ZxStatus::kBadHandle));
    return ZxStatus::kBadHandle;
  }
  drop_handle(h);
  record(args + " -> ok");
  return std::monostate{};
}

ZxResult<HandlePair> Simulator::socket_create(ProcessId proc,
                                              uint64_t capacity) {
  std::string args = "socket_create proc=" + std::to_string(proc) +
                     " capacity=" + std::to_string(capacity);
  auto fail = [&](ZxStatus s) -> ZxResult<HandlePair> {
    record(args + " -> err=" + status_name(s));
    return s;
  };
  if (!process_live(proc)) return fail(ZxStatus::kBadProcess);
  if (capacity == 0) return fail(ZxStatus::kInvalidArgs);
  KernelObject& sock = new_object(ObjectKind::kSocket);
  std::get<SocketState>(sock.state).capacity = capacity;
  HandleId h0 = new_handle(sock.id, kTransportDefault, proc, 0);
  HandleId h1 = new_handle(sock.id, kTransportDefault, proc, 1);
  record(args + " -> h" + std::to_string(h0) + ",h" + std::to_string(h1));
  return HandlePair{h0, h1};
}

ZxResult<uint64_t> Simulator::socket_write(HandleId h,
                                           const std::vector<uint8_t>& bytes) {
  std::string args =
      "socket_write h=" + std::to_string(h) + " bytes=" + hex_encode(bytes);
  auto fail = [&](ZxStatus s) -> ZxResult<uint64_t> {
    record(args + " -> err=" + status_name(s));
    return s;
  };
  Handle* handle = live_handle(h);
  if (!handle) return fail(ZxStatus::kBadHandle);
  if (!handle->owner) return fail(ZxStatus::kNotOwner);
  KernelObject* obj = object(handle->object);
  if (obj->kind != ObjectKind::kSocket) return fail(ZxStatus::kInvalidArgs);
  if (!handle->rights.contains(ZxRight::kWrite))
    return fail(ZxStatus::kAccessDenied);

  auto& sock = std::get<SocketState>(obj->state);
  auto& peer_queue = sock.incoming[1 - handle->endpoint];
  uint64_t free_space = sock.capacity - peer_queue.size();
  if (free_space == 0) return fail(ZxStatus::kFull);
  uint64_t accepted = std::min<uint64_t>(bytes.size(), free_space);
  peer_queue.insert(peer_queue.end(), bytes.begin(),
                    bytes.begin() + static_cast<ptrdiff_t>(accepted));
  record(args + " -> n=" + std::to_string(accepted));
  return accepted;
}

ZxResult<std::vector<uint8_t>> Simulator::socket_read(HandleId h, uint64_t n) {
  std::string args =
      "socket_read h=" + std::to_string(h) + " n=" + std::to_string(n);
  auto fail = [&](ZxStatus s) -> ZxResult<std::vector<uint8_t>> {
    record(args + " -> err=" + status_name(s));
    return s;
  };
  Handle* handle = live_handle(h);
  if (!handle) return fail(ZxStatus::kBadHandle);
  if (!handle->owner) return fail(ZxStatus::kNotOwner);
  KernelObject* obj = object(handle->object);
  if (obj->kind != ObjectKind::kSocket) return fail(ZxStatus::kInvalidArgs);
  if (!handle->rights.contains(ZxRight::kRead))
    return fail(ZxStatus::kAccessDenied);

  auto& queue = std::get<SocketState>(obj->state).incoming[handle->endpoint];
  if (queue.empty()) return fail(ZxStatus::kWouldBlock);
  uint64_t take = std::min<uint64_t>(n, queue.size());
  std::vector<uint8_t> out(queue.begin(),
                           queue.begin() + static_cast<ptrdiff_t>(take));
  queue.erase(queue.begin(), queue.begin() + static_cast<ptrdiff_t>(take));
  record(args + " -> bytes=" + hex_encode(out));
  return out;
}

ZxResult<HandlePair> Simulator::fifo_create(ProcessId proc, uint64_t elem_size,
                                            uint64_t depth) {
  std::string args = "fifo_create proc=" + std::to_string(proc) +
                     " elem=" + std::to_string(elem_size) +
                     " depth=" + std::to_string(depth);
  auto fail = [&](ZxStatus s) -> ZxResult<HandlePair> {
    record(args + " -> err=" + status_name(s));
    return s;
  };
  if (!process_live(proc)) return fail(ZxStatus::kBadProcess);
  bool elem_ok = elem_size == 4 || elem_size == 8 || elem_size == 16 ||
                 elem_size == 32 || elem_size == 64;
  if (!elem_ok || depth == 0 || elem_size * depth > 4096)
    return fail(ZxStatus::kInvalidArgs);
  KernelObject& fifo = new_object(ObjectKind::kFifo);
  auto& state = std::get<FifoState>(fifo.state);
  state.elem_size = elem_size;
  state.depth = depth;
  HandleId h0 = new_handle(fifo.id, kTransportDefault, proc, 0);
  HandleId h1 = new_handle(fifo.id, kTransportDefault, proc, 1);
  record(args + " -> h" + std::to_string(h0) + ",h" + std::to_string(h1));
  return HandlePair{h0, h1};
}

ZxResult<uint64_t> Simulator::fifo_write(HandleId h,
                                         const std::vector<uint8_t>& bytes) {
  std::string args =
      "fifo_write h=" + std::to_string(h) + " bytes=" + hex_encode(bytes);
  auto fail = [&](ZxStatus s) -> ZxResult<uint64_t> {
    record(args + " -> err=" + status_name(s));
    return s;
  };
  Handle* handle = live_handle(h);
  if (!handle) return fail(ZxStatus::kBadHandle);
  if (!handle->owner) return fail(ZxStatus::kNotOwner);
  KernelObject* obj = object(handle->object);
  if (obj->kind != ObjectKind::kFifo) return fail(ZxStatus::kInvalidArgs);
  if (!handle->rights.contains(ZxRight::kWrite))
    return fail(ZxStatus::kAccessDenied);

  auto& fifo = std::get<FifoState>(obj->state);
  if (bytes.empty() || bytes.size() % fifo.elem_size != 0)
    return fail(ZxStatus::kInvalidArgs);
  auto& peer_queue = fifo.incoming[1 - handle->endpoint];
  uint64_t free_slots = fifo.depth - peer_queue.size();
  if (free_slots == 0) return fail(ZxStatus::kFull);
  uint64_t count = bytes.size() / fifo.elem_size;
  uint64_t accepted = std::min(count, free_slots);
  for (uint64_t i = 0; i < accepted; i++) {
    auto begin = bytes.begin() + static_cast<ptrdiff_t>(i * fifo.elem_size);
    peer_queue.emplace_back(begin, begin + static_cast<ptrdiff_t>(fifo.elem_size));
  }
  record(args + " -> n=" + std::to_string(accepted));
  return accepted;
}

ZxResult<std::vector<uint8_t>> Simulator::fifo_read(HandleId h,
                                                    uint64_t max_elems) {
  std::string args =
      "fifo_read h=" + std::to_string(h) + " max=" + std::to_string(max_elems);
  auto fail = [&](ZxStatus s) -> ZxResult<std::vector<uint8_t>> {
    record(args + " -> err=" + status_name(s));
    return s;
  };
  Handle* handle = live_handle(h);
  if (!handle) return fail(ZxStatus::kBadHandle);
  if (!handle->owner) return fail(ZxStatus::kNotOwner);
  KernelObject* obj = object(handle->object);
  if (obj->kind != ObjectKind::kFifo) return fail(ZxStatus::kInvalidArgs);
  if (!handle->rights.contains(ZxRight::kRead))
    return fail(ZxStatus::kAccessDenied);
  if (max_elems == 0) return fail(ZxStatus::kInvalidArgs);

  auto& queue = std::get<FifoState>(obj->state).incoming[handle->endpoint];
  if (queue.empty()) return fail(ZxStatus::kWouldBlock);
  std::vector<uint8_t> out;
  uint64_t taken = 0;
  while (!queue.empty() && taken < max_elems) {
    out.insert(out.end(), queue.front().begin(), queue.front().end());
    queue.pop_front();
    taken++;
  }
  record(args + " -> bytes=" + hex_encode(out));
  return out;
}

ZxResult<HandleId> Simulator::vmo_create(ProcessId proc, uint64_t size) {
  std::string args = "vmo_create proc=" + std::to_string(proc) +
                     " size=" + std::to_string(size);
  auto fail = [&](ZxStatus s) -> ZxResult<HandleId> {
    record(args + " -> err=" + status_name(s));
    return s;
  };
  if (!process_live(proc)) return fail(ZxStatus::kBadProcess);
  KernelObject& vmo = new_object(ObjectKind::kVmo);
  std::get<VmoState>(vmo.state).size = size;
  HandleId h = new_handle(vmo.id, kVmoDefault, proc);
  record(args + " -> h" + std::to_string(h));
  return h;
}

ZxResult<std::monostate> Simulator::vmo_write(HandleId h, uint64_t offset,
                                              const std::vector<uint8_t>& bytes) {
  std::string args = "vmo_write h=" + std::to_string(h) +
                     " off=" + std::to_string(offset) +
                     " bytes=" + hex_encode(bytes);
  auto fail = [&](ZxStatus s) -> ZxResult<std::monostate> {
    record(args + " -> err=" + status_name(s));
    return s;
  };
  Handle* handle = live_handle(h);
  if (!handle) return fail(ZxStatus::kBadHandle);
  if (!handle->owner) return fail(ZxStatus::kNotOwner);
  KernelObject* obj = object(handle->object);
  if (obj->kind != ObjectKind::kVmo) return fail(ZxStatus::kInvalidArgs);
  if (!handle->rights.contains(ZxRight::kWrite))
    return fail(ZxStatus::kAccessDenied);

  auto& vmo = std::get<VmoState>(obj->state);
  if (offset > vmo.size || bytes.size() > vmo.size - offset)
    return fail(ZxStatus::kOutOfRange);
  if (vmo.data.size() < offset + bytes.size())
    vmo.data.resize(offset + bytes.size(), 0);
  std::copy(bytes.begin(), bytes.end(),
            vmo.data.begin() + static_cast<ptrdiff_t>(offset));
  record(args + " -> ok");
  return std::monostate{};
}

ZxResult<std::vector<uint8_t>> Simulator::vmo_read(HandleId h, uint64_t offset,
                                                   uint64_t n) {
  std::string args = "vmo_read h=" + std::to_string(h) +
                     " off=" + std::to_string(offset) +
                     " n=" + std::to_string(n);
  auto fail = [&](ZxStatus s) -> ZxResult<std::vector<uint8_t>> {
    record(args + " -> err=" + status_name(s));
    return s;
  };
  Handle* handle = live_handle(h);
  if (!handle) return fail(ZxStatus::kBadHandle);
  if (!handle->owner) return fail(ZxStatus::kNotOwner);
  KernelObject* obj = object(handle->object);
  if (obj->kind != ObjectKind::kVmo) return fail(ZxStatus::kInvalidArgs);
  if (!handle->rights.contains(ZxRight::kRead))
    return fail(ZxStatus::kAccessDenied);

  auto& vmo = std::get<VmoState>(obj->state);
  if (offset > vmo.size || n > vmo.size - offset)
    return fail(ZxStatus::kOutOfRange);
  std::vector<uint8_t> out(n, 0);  // zero-fill beyond the written extent
  for (uint64_t i = 0; i < n && offset + i < vmo.data.size(); i++)
    out[i] = vmo.data[offset + i];
  record(args + " -> bytes=" + hex_encode(out));
  return out;
}

ZxResult<HandleId> Simulator::vmar_allocate(HandleId parent, uint64_t offset,
                                            uint64_t size,
                                            ZxRights memory_rights) {
  std::string args = "vmar_allocate parent=h" + std::to_string(parent) +
                     " off=" + std::to_string(offset) +
                     " size=" + std::to_string(size) +
                     " rights=" + memory_rights_str(memory_rights);
  auto fail = [&](ZxStatus s) -> ZxResult<HandleId> {
    record(args + " -> err=" + status_name(s));
    return s;
  };
  Handle* handle = live_handle(parent);
  if (!handle) return fail(ZxStatus::kBadHandle);
  if (!handle->owner) return fail(ZxStatus::kNotOwner);
  KernelObject* obj = object(handle->object);
  if (obj->kind != ObjectKind::kVmar) return fail(ZxStatus::kInvalidArgs);
  if (size == 0 || !memory_rights.subset_of(kMemoryRights))
    return fail(ZxStatus::kInvalidArgs);
  if (!handle->rights.contains(ZxRight::kMap))
    return fail(ZxStatus::kAccessDenied);

  auto& parent_state = std::get<VmarState>(obj->state);
  if (!memory_rights.subset_of(parent_state.memory_rights))
    return fail(ZxStatus::kRightsEscalation);
  if (offset > parent_state.size || size > parent_state.size - offset)
    return fail(ZxStatus::kOutOfRange);
  uint64_t base = parent_state.base + offset;
  for (ObjectId sibling_id : parent_state.children) {
    const auto& sib = std::get<VmarState>(object(sibling_id)->state);
    if (base < sib.base + sib.size && sib.base < base + size)
      return fail(ZxStatus::kOverlap);
  }

  KernelObject& child = new_object(ObjectKind::kVmar);
  auto& child_state = std::get<VmarState>(child.state);
  child_state.base = base;
  child_state.size = size;
  child_state.memory_rights = memory_rights;
  child.retained = true;  // the parent reference keeps the child alive
  std::get<VmarState>(object(handle->object)->state)
      .children.push_back(child.id);

  ZxRights handle_rights = kVmarBase;
  if (memory_rights.contains(ZxRight::kRead))
    handle_rights = handle_rights.union_with({ZxRight::kRead});
  if (memory_rights.contains(ZxRight::kWrite))
    handle_rights = handle_rights.union_with({ZxRight::kWrite});
  if (memory_rights.contains(ZxRight::kExecute))
    handle_rights = handle_rights.union_with({ZxRight::kExecute});
  HandleId h = new_handle(child.id, handle_rights, *handle->owner);
  record(args + " -> h" + std::to_string(h));
  return h;
}

std::vector<uint8_t> Simulator::cprng_draw(size_t n) {
  std::vector<uint8_t> out = cprng_.draw(n);
  record("cprng_draw n=" + std::to_string(n) + " -> bytes=" + hex_encode(out));
  return out;
}

std::optional<HandleInfo> Simulator::handle_info(HandleId h) const {
  auto it = handles_.find(h);
  if (it == handles_.end()) return std::nullopt;
  const Handle& handle = it->second;
  return HandleInfo{handle.id, handle.object, handle.rights, handle.owner,
                    handle.endpoint};
}

bool Simulator::object_alive(ObjectId id) const { return object(id) != nullptr; }

std::optional<ObjectKind> Simulator::object_kind(ObjectId id) const {
  const KernelObject* obj = object(id);
  if (!obj) return std::nullopt;
  return obj->kind;
}

uint32_t Simulator::object_refcount(ObjectId id) const {
  const KernelObject* obj = object(id);
  return obj ? obj->refcount : 0;
}

std::vector<HandleId> Simulator::live_handles() const {
  std::vector<HandleId> out;
  for (const auto& [id, handle] : handles_) out.push_back(id);
  return out;
}

std::optional<VmarInfo> Simulator::vmar_info(ObjectId id) const {
  const KernelObject* obj = object(id);
  if (!obj || obj->kind != ObjectKind::kVmar) return std::nullopt;
  const auto& state = std::get<VmarState>(obj->state);
  return VmarInfo{obj->id, state.base, state.size, state.memory_rights,
                  state.children};
}

std::vector<std::string> Simulator::audit() const {
  std::vector<std::string> violations;

  // Refcounts equal the live handles per object.
  std::map<ObjectId, uint32_t> counts;
  for (const auto& [id, handle] : handles_) counts[handle.object]++;
  for (const auto& [id, obj] : objects_) {
    uint32_t expected = counts.count(id) ? counts.at(id) : 0;
    if (obj.refcount != expected) {
      violations.push_back("object " + std::to_string(id) + " refcount " +
                           std::to_string(obj.refcount) + " != live handles " +
                           std::to_string(expected));
    }
    if (obj.refcount == 0 && !obj.retained) {
      violations.push_back("object " + std::to_string(id) +
                           " survives with no handles and no retainer");
    }
  }
  for (const auto& [oid, count] : counts) {
    if (!objects_.count(oid)) {
      violations.push_back("handle references reclaimed object " +
                           std::to_string(oid));
    }
  }

  // Exactly one owner: a process, or one queue slot while in transit.
  std::map<HandleId, int> transit_appearances;
  for (const auto& [id, obj] : objects_) {
    if (obj.kind != ObjectKind::kChannel) continue;
    const auto& chan = std::get<ChannelState>(obj.state);
    for (const auto& queue : chan.incoming) {
      for (const Message& msg : queue) {
        for (HandleId h : msg.handles) transit_appearances[h]++;
      }
    }
  }
  for (const auto& [id, handle] : handles_) {
    int in_queues = transit_appearances.count(id) ? transit_appearances.at(id) : 0;
    if (handle.owner) {
      if (!process_live(*handle.owner)) {
        violations.push_back("handle " + std::to_string(id) +
                             " owned by dead process");
      }
      if (in_queues != 0) {
        violations.push_back("handle " + std::to_string(id) +
                             " owned by a process yet queued in transit");
      }
    } else if (in_queues != 1) {
      violations.push_back("handle " + std::to_string(id) + " in transit in " +
                           std::to_string(in_queues) + " queue slots");
    }
  }
  for (const auto& [h, n] : transit_appearances) {
    if (!handles_.count(h)) {
      violations.push_back("queue holds reclaimed handle " + std::to_string(h));
    }
  }

  // VMAR tree: containment, sibling disjointness, rights subset.
  for (const auto& [id, obj] : objects_) {
    if (obj.kind != ObjectKind::kVmar) continue;
    const auto& vmar = std::get<VmarState>(obj.state);
    for (size_t i = 0; i < vmar.children.size(); i++) {
      const KernelObject* child = object(vmar.children[i]);
      if (!child) {
        violations.push_back("vmar " + std::to_string(id) +
                             " references reclaimed child");
        continue;
      }
      const auto& cs = std::get<VmarState>(child->state);
      if (cs.base < vmar.base || cs.base + cs.size > vmar.base + vmar.size) {
        violations.push_back("vmar child " + std::to_string(child->id) +
                             " escapes parent range");
      }
      if (!cs.memory_rights.subset_of(vmar.memory_rights)) {
        violations.push_back("vmar child " + std::to_string(child->id) +
                             " exceeds parent rights");
      }
      for (size_t j = i + 1; j < vmar.children.size(); j++) {
        const auto& other =
            std::get<VmarState>(object(vmar.children[j])->state);
        if (cs.base < other.base + other.size &&
            other.base < cs.base + cs.size) {
          violations.push_back("vmar siblings overlap under " +
                               std::to_string(id));
        }
      }
    }
  }
  return violations;
}

}  // namespace fuchsim::zircon
