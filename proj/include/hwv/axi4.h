// Copyright 2026 The hwv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// AXI4 bus functional models on top of sim::Simulator.
//
// BusCircuit() builds a circuit whose inputs are the five channels' signals
// (aw_*, w_*, b_*, ar_*, r_*), a clock and the active-low reset `aresetn`.
// The testbench components below drive their side of each channel from
// simulator processes and decide handshakes on the values sampled at the
// clock edge:
//
//   sim::Simulator sim(axi4::BusCircuit());
//   axi4::MemorySlave slave(sim, {}, 1024);
//   axi4::FunctionalMaster master(sim);
//   master.Reset();
//   auto w = master.CreateWriteTrx(0, beats, /*len=*/15, /*size=*/2);
//   master.Await(w);
//
// Supported subset: INCR bursts, one master, one ID, in-order responses.
// Components keep pointers into the simulator and vice versa; they must be
// destroyed only after the simulator stops stepping.

#ifndef HWV_AXI4_H_
#define HWV_AXI4_H_

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hwv/ir.h"
#include "hwv/random.h"
#include "hwv/sim.h"

namespace hwv::axi4 {

struct BusConfig {
  unsigned data_bits = 32;  // 8, 16, 32 or 64
  unsigned addr_bits = 32;

  unsigned bus_bytes() const { return data_bits / 8; }
};

enum class Burst : std::uint64_t { kFixed = 0, kIncr = 1, kWrap = 2 };
enum class Resp : std::uint64_t { kOkay = 0, kExOkay = 1, kSlvErr = 2, kDecErr = 3 };

std::string_view RespName(Resp resp);

// Throws Error(kInvalidArgument) for unsupported widths.
ir::Circuit BusCircuit(const BusConfig& config = {});

struct ChannelSpec {
  std::string name;                 // "aw", "w", "b", "ar", "r"
  std::vector<std::string> fields;  // payload signals without the prefix
  bool master_drives_valid;
};
const std::vector<ChannelSpec>& Channels();

using TrxId = std::size_t;

enum class TrxKind { kWrite, kRead };
enum class TrxStatus { kPending, kInFlight, kComplete };

struct Transaction {
  TrxId id = 0;
  TrxKind kind = TrxKind::kWrite;
  std::uint64_t addr = 0;
  unsigned len = 0;   // beats - 1
  unsigned size = 0;  // log2 bytes per beat
  // Beat values, least significant byte at the beat's address. Filled on
  // completion for reads.
  std::vector<std::uint64_t> data;
  // Per-beat byte enables relative to the beat (bit 0 = byte at address).
  std::vector<std::uint64_t> strobes;
  TrxStatus status = TrxStatus::kPending;
  Resp resp = Resp::kOkay;

  std::uint64_t bytes() const { return std::uint64_t{len + 1} << size; }
};

class FunctionalMaster {
 public:
  explicit FunctionalMaster(sim::Simulator& sim, BusConfig config = {});
  FunctionalMaster(const FunctionalMaster&) = delete;
  FunctionalMaster& operator=(const FunctionalMaster&) = delete;

  // Holds aresetn low for `cycles` edges, then releases it.
  void Reset(std::uint64_t cycles = 2);

  // Non-blocking. The transaction starts right away when no other write is
  // in flight and is queued otherwise. `strobes` defaults to all bytes of
  // each beat. Throws Error(kInvalidArgument) on a beat count other than
  // len+1, len > 255, a size wider than the bus or an unaligned address.
  TrxId CreateWriteTrx(std::uint64_t addr, std::vector<std::uint64_t> data,
                       unsigned len, unsigned size,
                       std::vector<std::uint64_t> strobes = {});
  TrxId CreateReadTrx(std::uint64_t addr, unsigned len, unsigned size);

  // Steps the simulator until `id` completes. Throws Error(kInvalidArgument)
  // for unknown ids and Error(kTimeout) when `max_cycles` pass first.
  const Transaction& Await(TrxId id, std::uint64_t max_cycles = 10'000);
  const Transaction& Get(TrxId id) const;
  bool Idle() const;

  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  void Validate(std::uint64_t addr, unsigned len, unsigned size) const;
  void CheckHazards(const Transaction& trx);
  void StartWrite(TrxId id);
  void StartRead(TrxId id);
  sim::Process WriteAddress(TrxId id);
  sim::Process WriteData(TrxId id);
  sim::Process WriteResponse(TrxId id);
  sim::Process ReadAddress(TrxId id);
  sim::Process ReadData(TrxId id);

  sim::Simulator& sim_;
  BusConfig config_;
  std::vector<Transaction> trx_;
  std::deque<TrxId> write_queue_;
  std::deque<TrxId> read_queue_;
  bool write_in_flight_ = false;
  bool read_in_flight_ = false;
  std::vector<std::string> warnings_;
};

// Ready/valid delays of the slave, drawn uniformly from [0, max_latency]
// per handshake from one seeded stream per channel.
struct LatencyPolicy {
  unsigned max_latency = 0;
  std::uint64_t seed = kDefaultSeed;
};

// Zero-initialized byte-addressable memory of `capacity_words` bus words.
// Write beats are committed as they are accepted. Bursts that do not fit
// get SLVERR and leave memory unchanged.
class MemorySlave {
 public:
  MemorySlave(sim::Simulator& sim, BusConfig config,
              std::uint64_t capacity_words, LatencyPolicy latency = {});
  MemorySlave(const MemorySlave&) = delete;
  MemorySlave& operator=(const MemorySlave&) = delete;

  const std::vector<std::uint8_t>& memory() const { return memory_; }
  std::uint64_t capacity_bytes() const { return memory_.size(); }

 private:
  struct BurstState {
    std::uint64_t addr;
    unsigned len;
    unsigned size;
    bool error;
    unsigned beats_done = 0;
  };

  bool Fits(std::uint64_t addr, unsigned len, unsigned size) const;
  std::uint64_t Latency(Rng& rng) const;
  sim::Process AcceptAddress(bool write);
  sim::Process AcceptWriteData();
  sim::Process SendWriteResponse();
  sim::Process SendReadData();
  std::uint64_t BeatAddress(const BurstState& b, unsigned beat) const;

  sim::Simulator& sim_;
  BusConfig config_;
  std::vector<std::uint8_t> memory_;
  LatencyPolicy latency_;
  std::vector<Rng> rngs_;  // aw, w, b, ar, r
  std::deque<BurstState> writes_;
  std::deque<Resp> responses_;
  std::deque<BurstState> reads_;
};

// Edge monitor enforcing ready/valid rules: payload and valid stay stable
// while valid is high and ready low, `last` marks exactly the final beat of
// each burst, and B follows the final W beat of its burst.
class HandshakeChecker {
 public:
  explicit HandshakeChecker(sim::Simulator& sim);

  const std::vector<std::string>& violations() const { return violations_; }
  std::uint64_t transfers(const std::string& channel) const;

 private:
  struct ChannelState {
    bool valid = false;
    bool ready = false;
    std::vector<std::uint64_t> payload;
  };
  void OnEdge(const sim::Simulator& sim);

  std::map<std::string, ChannelState> state_;
  std::map<std::string, std::uint64_t> transfers_;
  std::deque<std::uint64_t> aw_lens_;
  std::deque<std::uint64_t> ar_lens_;
  std::uint64_t w_beats_ = 0;
  std::uint64_t r_beats_ = 0;
  std::uint64_t w_bursts_done_ = 0;
  std::uint64_t b_seen_ = 0;
  std::vector<std::string> violations_;
};

struct ChannelEvent {
  std::uint64_t cycle;
  std::string channel;
  bool valid;
  bool ready;
  std::vector<std::uint64_t> payload;  // in ChannelSpec::fields order

  bool operator==(const ChannelEvent&) const = default;
};

// Records every edge at which a channel has valid or ready high.
class ChannelTracer {
 public:
  explicit ChannelTracer(sim::Simulator& sim);

  const std::vector<ChannelEvent>& events() const { return events_; }
  // Header "cycle,channel,valid,ready,payload"; payload as
  // "field=0x..;field=0x..".
  void WriteCsv(std::ostream& out) const;

 private:
  std::vector<ChannelEvent> events_;
};

}  // namespace hwv::axi4

#endif  // HWV_AXI4_H_
