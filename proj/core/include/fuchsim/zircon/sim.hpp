#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "fuchsim/zircon/cprng.hpp"

namespace fuchsim::zircon {

/// The twelve handle rights.
enum class ZxRight : uint16_t {
  kDuplicate = 1u << 0,
  kTransfer = 1u << 1,
  kRead = 1u << 2,
  kWrite = 1u << 3,
  kExecute = 1u << 4,
  kMap = 1u << 5,
  kGetProperty = 1u << 6,
  kSetProperty = 1u << 7,
  kSignal = 1u << 8,
  kWait = 1u << 9,
  kInspect = 1u << 10,
  kDestroy = 1u << 11,
};

class ZxRights {
 public:
  ZxRights() = default;
  ZxRights(std::initializer_list<ZxRight> rights) {
    for (ZxRight r : rights) bits_ |= static_cast<uint16_t>(r);
  }
  static ZxRights from_bits(uint16_t bits) {
    ZxRights r;
    r.bits_ = bits & 0x0FFF;
    return r;
  }

  bool contains(ZxRight r) const {
    return (bits_ & static_cast<uint16_t>(r)) != 0;
  }
  bool subset_of(ZxRights other) const { return (bits_ & ~other.bits_) == 0; }
  ZxRights intersect(ZxRights other) const {
    return from_bits(bits_ & other.bits_);
  }
  ZxRights union_with(ZxRights other) const {
    return from_bits(bits_ | other.bits_);
  }
  uint16_t bits() const { return bits_; }

  friend bool operator==(ZxRights a, ZxRights b) { return a.bits_ == b.bits_; }

 private:
  uint16_t bits_ = 0;
};

enum class ZxStatus {
  kOk,
  kAccessDenied,
  kBadHandle,
  kBadProcess,
  kWouldBlock,
  kFull,
  kInvalidArgs,
  kRightsEscalation,
  kNotOwner,
  kOutOfRange,
  kOverlap,
};

const std::string& status_name(ZxStatus s);

template <typename T>
class ZxResult {
 public:
  ZxResult(T value) : status_(ZxStatus::kOk), value_(std::move(value)) {}
  ZxResult(ZxStatus status) : status_(status) {}

  bool ok() const { return status_ == ZxStatus::kOk; }
  ZxStatus status() const { return status_; }
  const T& value() const { return *value_; }
  T& value() { return *value_; }
  const T& operator*() const { return *value_; }

 private:
  ZxStatus status_;
  std::optional<T> value_;
};

using ObjectId = uint64_t;
using ProcessId = uint64_t;  // the process object's id
using HandleId = uint64_t;

enum class ObjectKind { kProcess, kChannel, kSocket, kFifo, kVmo, kVmar };

const std::string& object_kind_name(ObjectKind k);

struct HandlePair {
  HandleId first = 0;
  HandleId second = 0;
};

struct Message {
  std::vector<uint8_t> bytes;
  std::vector<HandleId> handles;
};

struct ProcessInfo {
  ProcessId pid = 0;
  HandleId root_vmar = 0;
};

/// Owner is a process or, while a handle rides a channel message, the
/// kernel (in transit).
struct HandleInfo {
  HandleId id = 0;
  ObjectId object = 0;
  ZxRights rights;
  std::optional<ProcessId> owner;  // nullopt: in transit
  int endpoint = 0;
};

struct VmarInfo {
  ObjectId id = 0;
  uint64_t base = 0;
  uint64_t size = 0;
  ZxRights memory_rights;
  std::vector<ObjectId> children;
};

class ReplayError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Deterministic in-memory kernel-object and handle simulator. One
/// mutable state machine; operations are serialized through the owner.
/// Every operation appends one replayable trace line
/// `seq op args -> result` with byte values hex-encoded.
class Simulator {
 public:
  static constexpr uint64_t kRootVmarSize = uint64_t{1} << 48;

  Simulator();
  Simulator(std::array<uint8_t, 32> cprng_seed, uint64_t reseed_interval);

  ProcessInfo process_create(const std::string& name);

  ZxResult<HandlePair> channel_create(ProcessId proc);
  ZxResult<std::monostate> channel_write(HandleId h,
                                         const std::vector<uint8_t>& bytes,
                                         const std::vector<HandleId>& handles);
  ZxResult<Message> channel_read(HandleId h, ProcessId reader);

  ZxResult<HandleId> handle_duplicate(HandleId h, ZxRights requested);
  ZxResult<std::monostate> handle_close(HandleId h);

  ZxResult<HandlePair> socket_create(ProcessId proc, uint64_t capacity);
  ZxResult<uint64_t> socket_write(HandleId h, const std::vector<uint8_t>& bytes);
  ZxResult<std::vector<uint8_t>> socket_read(HandleId h, uint64_t n);

  ZxResult<HandlePair> fifo_create(ProcessId proc, uint64_t elem_size,
                                   uint64_t depth);
  ZxResult<uint64_t> fifo_write(HandleId h, const std::vector<uint8_t>& bytes);
  ZxResult<std::vector<uint8_t>> fifo_read(HandleId h, uint64_t max_elems);

  ZxResult<HandleId> vmo_create(ProcessId proc, uint64_t size);
  ZxResult<std::monostate> vmo_write(HandleId h, uint64_t offset,
                                     const std::vector<uint8_t>& bytes);
  ZxResult<std::vector<uint8_t>> vmo_read(HandleId h, uint64_t offset,
                                          uint64_t n);

  ZxResult<HandleId> vmar_allocate(HandleId parent, uint64_t offset,
                                   uint64_t size, ZxRights memory_rights);

  std::vector<uint8_t> cprng_draw(size_t n);
  const Cprng& cprng() const { return cprng_; }

  // Inspection for tests and tools.
  std::optional<HandleInfo> handle_info(HandleId h) const;
  bool object_alive(ObjectId id) const;
  std::optional<ObjectKind> object_kind(ObjectId id) const;
  uint32_t object_refcount(ObjectId id) const;
  std::vector<HandleId> live_handles() const;
  std::optional<VmarInfo> vmar_info(ObjectId id) const;

  /// Internal consistency check: refcount bookkeeping, single ownership,
  /// VMAR containment/disjointness/rights-subset. Returns violations.
  std::vector<std::string> audit() const;

  const std::vector<std::string>& trace() const { return trace_; }

 private:
  struct ChannelState {
    std::deque<Message> incoming[2];
  };
  struct SocketState {
    uint64_t capacity = 0;
    std::deque<uint8_t> incoming[2];
  };
  struct FifoState {
    uint64_t elem_size = 0;
    uint64_t depth = 0;
    std::deque<std::vector<uint8_t>> incoming[2];
  };
  struct VmoState {
    uint64_t size = 0;
    std::vector<uint8_t> data;
  };
  struct VmarState {
    uint64_t base = 0;
    uint64_t size = 0;
    ZxRights memory_rights;
    std::vector<ObjectId> children;
  };
  struct ProcessState {
    std::string name;
    ObjectId root_vmar = 0;
  };

  struct KernelObject {
    ObjectId id = 0;
    ObjectKind kind = ObjectKind::kProcess;
    uint32_t refcount = 0;
    bool retained = false;  // processes and parent-held VMAR children
    std::variant<std::monostate, ProcessState, ChannelState, SocketState,
                 FifoState, VmoState, VmarState>
        state;
  };

  struct Handle {
    HandleId id = 0;
    ObjectId object = 0;
    ZxRights rights;
    std::optional<ProcessId> owner;
    int endpoint = 0;
  };

  KernelObject& new_object(ObjectKind kind);
  HandleId new_handle(ObjectId object, ZxRights rights, ProcessId owner,
                      int endpoint = 0);
  Handle* live_handle(HandleId h);
  KernelObject* object(ObjectId id);
  const KernelObject* object(ObjectId id) const;
  bool process_live(ProcessId pid) const;

  void drop_handle(HandleId h);
  void release_object(ObjectId id);
  void reclaim(ObjectId id);

  void record(const std::string& line);

  uint64_t object_seq_ = 0;
  uint64_t handle_seq_ = 0;
  uint64_t trace_seq_ = 0;
  std::map<ObjectId, KernelObject> objects_;
  std::map<HandleId, Handle> handles_;
  Cprng cprng_;
  std::vector<std::string> trace_;
};

/// Re-executes a recorded trace in a fresh simulator (seeded the same
/// way as the recording one), checking each produced line against the
/// recording. Divergence raises ReplayError.
Simulator replay_trace(const std::string& trace_text,
                       std::array<uint8_t, 32> cprng_seed = {},
                       uint64_t reseed_interval = Cprng::kDefaultReseedInterval);

}  // namespace fuchsim::zircon
