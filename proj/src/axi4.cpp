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

#include "hwv/axi4.h"

#include <algorithm>
#include <ostream>
#include <utility>

#include <fmt/format.h>

#include "hwv/error.h"

namespace hwv::axi4 {
namespace {

constexpr std::uint64_t k4KiB = 4096;

[[noreturn]] void Invalid(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, message);
}

std::uint64_t Mask(unsigned bits) {
  return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

std::string Sig(std::string_view channel, std::string_view field) {
  return fmt::format("{}_{}", channel, field);
}

}  // namespace

std::string_view RespName(Resp resp) {
  switch (resp) {
    case Resp::kOkay: return "OKAY";
    case Resp::kExOkay: return "EXOKAY";
    case Resp::kSlvErr: return "SLVERR";
    case Resp::kDecErr: return "DECERR";
  }
  return "?";
}

const std::vector<ChannelSpec>& Channels() {
  static const std::vector<ChannelSpec> kChannels = {
      {"aw", {"addr", "len", "size", "burst"}, true},
      {"w", {"data", "strb", "last"}, true},
      {"b", {"resp"}, false},
      {"ar", {"addr", "len", "size", "burst"}, true},
      {"r", {"data", "resp", "last"}, false},
  };
  return kChannels;
}

ir::Circuit BusCircuit(const BusConfig& config) {
  if (config.data_bits != 8 && config.data_bits != 16 &&
      config.data_bits != 32 && config.data_bits != 64) {
    Invalid(fmt::format("unsupported bus width {}", config.data_bits));
  }
  if (config.addr_bits == 0 || config.addr_bits > 64) {
    Invalid(fmt::format("unsupported address width {}", config.addr_bits));
  }
  auto width = [&](std::string_view field) -> unsigned {
    if (field == "addr") return config.addr_bits;
    if (field == "len") return 8;
    if (field == "size") return 3;
    if (field == "burst" || field == "resp") return 2;
    if (field == "data") return config.data_bits;
    if (field == "strb") return config.bus_bytes();
    return 1;
  };
  ir::ModuleDef m;
  m.name = "Axi4Bus";
  m.ports.push_back({"clock", ir::Direction::kInput, ir::PortKind::kClock, 1});
  m.ports.push_back({"aresetn", ir::Direction::kInput, ir::PortKind::kData, 1});
  for (const ChannelSpec& ch : Channels()) {
    for (const char* hs : {"valid", "ready"}) {
      m.ports.push_back(
          {Sig(ch.name, hs), ir::Direction::kInput, ir::PortKind::kData, 1});
    }
    for (const std::string& f : ch.fields) {
      m.ports.push_back({Sig(ch.name, f), ir::Direction::kInput,
                         ir::PortKind::kData, width(f)});
    }
  }
  for (const ChannelSpec& ch : Channels()) {
    std::string fire = Sig(ch.name, "fire");
    m.ports.push_back({fire, ir::Direction::kOutput, ir::PortKind::kData, 1});
    m.assignments.push_back(
        {fire, ir::Binary(ir::BinaryOp::kAnd, ir::Ref(Sig(ch.name, "valid")),
                          ir::Ref(Sig(ch.name, "ready")))});
  }
  ir::Circuit c;
  c.name = "Axi4Bus";
  c.modules.push_back(std::move(m));
  return c;
}

// ---------------------------------------------------------------------------
// FunctionalMaster

FunctionalMaster::FunctionalMaster(sim::Simulator& sim, BusConfig config)
    : sim_(sim), config_(config) {}

void FunctionalMaster::Reset(std::uint64_t cycles) {
  sim_.Poke("aresetn", 0);
  sim_.Step(cycles);
  sim_.Poke("aresetn", 1);
}

void FunctionalMaster::Validate(std::uint64_t addr, unsigned len,
                                unsigned size) const {
  if (len > 255) Invalid(fmt::format("burst length {} exceeds 255", len));
  if ((1u << size) > config_.bus_bytes() || size > 3) {
    Invalid(fmt::format("size {} is wider than the {}-bit bus", size,
                        config_.data_bits));
  }
  if (addr % (std::uint64_t{1} << size) != 0) {
    Invalid(fmt::format("address {:#x} is not aligned to {} bytes", addr,
                        1u << size));
  }
  std::uint64_t end = addr + ((std::uint64_t{len} + 1) << size) - 1;
  if ((end & ~Mask(config_.addr_bits)) != 0) {
    Invalid(fmt::format("burst at {:#x} does not fit {} address bits", addr,
                        config_.addr_bits));
  }
}

void FunctionalMaster::CheckHazards(const Transaction& trx) {
  if (trx.addr / k4KiB != (trx.addr + trx.bytes() - 1) / k4KiB) {
    warnings_.push_back(fmt::format("transaction {} at {:#x} crosses a 4KB "
                                    "boundary",
                                    trx.id, trx.addr));
  }
  for (const Transaction& other : trx_) {
    if (other.id == trx.id || other.status == TrxStatus::kComplete) continue;
    if (other.kind == trx.kind) continue;
    bool overlap = trx.addr < other.addr + other.bytes() &&
                   other.addr < trx.addr + trx.bytes();
    if (overlap) {
      warnings_.push_back(fmt::format(
          "hazard: {} {} overlaps {} {} that has not completed; the result "
          "depends on channel timing",
          trx.kind == TrxKind::kRead ? "read" : "write", trx.id,
          other.kind == TrxKind::kRead ? "read" : "write", other.id));
    }
  }
}

TrxId FunctionalMaster::CreateWriteTrx(std::uint64_t addr,
                                       std::vector<std::uint64_t> data,
                                       unsigned len, unsigned size,
                                       std::vector<std::uint64_t> strobes) {
  Validate(addr, len, size);
  if (data.size() != std::size_t{len} + 1) {
    Invalid(fmt::format("write burst with len={} needs {} beats, got {}", len,
                        len + 1, data.size()));
  }
  const unsigned beat_bytes = 1u << size;
  if (strobes.empty()) strobes.assign(data.size(), Mask(beat_bytes));
  if (strobes.size() != data.size()) {
    Invalid(fmt::format("{} strobes for {} beats", strobes.size(), data.size()));
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    if ((data[i] & ~Mask(8 * beat_bytes)) != 0 ||
        (strobes[i] & ~Mask(beat_bytes)) != 0) {
      throw Error(ErrorCode::kOutOfRange,
                  fmt::format("beat {} does not fit {} bytes", i, beat_bytes));
    }
  }
  Transaction trx;
  trx.id = trx_.size();
  trx.kind = TrxKind::kWrite;
  trx.addr = addr;
  trx.len = len;
  trx.size = size;
  trx.data = std::move(data);
  trx.strobes = std::move(strobes);
  trx_.push_back(std::move(trx));
  CheckHazards(trx_.back());
  TrxId id = trx_.back().id;
  if (write_in_flight_) {
    write_queue_.push_back(id);
  } else {
    StartWrite(id);
  }
  return id;
}

TrxId FunctionalMaster::CreateReadTrx(std::uint64_t addr, unsigned len,
                                      unsigned size) {
  Validate(addr, len, size);
  Transaction trx;
  trx.id = trx_.size();
  trx.kind = TrxKind::kRead;
  trx.addr = addr;
  trx.len = len;
  trx.size = size;
  trx_.push_back(std::move(trx));
  CheckHazards(trx_.back());
  TrxId id = trx_.back().id;
  if (read_in_flight_) {
    read_queue_.push_back(id);
  } else {
    StartRead(id);
  }
  return id;
}

const Transaction& FunctionalMaster::Get(TrxId id) const {
  if (id >= trx_.size()) Invalid(fmt::format("unknown transaction {}", id));
  return trx_[id];
}

const Transaction& FunctionalMaster::Await(TrxId id, std::uint64_t max_cycles) {
  Get(id);
  std::uint64_t waited = 0;
  while (trx_[id].status != TrxStatus::kComplete) {
    if (waited++ >= max_cycles) {
      throw Error(ErrorCode::kTimeout,
                  fmt::format("transaction {} did not complete within {} "
                              "cycles",
                              id, max_cycles));
    }
    sim_.Step();
  }
  return trx_[id];
}

bool FunctionalMaster::Idle() const {
  return !write_in_flight_ && !read_in_flight_;
}

void FunctionalMaster::StartWrite(TrxId id) {
  write_in_flight_ = true;
  trx_[id].status = TrxStatus::kInFlight;
  sim_.Fork([this, id] { return WriteAddress(id); });
  sim_.Fork([this, id] { return WriteData(id); });
  sim_.Fork([this, id] { return WriteResponse(id); });
}

void FunctionalMaster::StartRead(TrxId id) {
  read_in_flight_ = true;
  trx_[id].status = TrxStatus::kInFlight;
  sim_.Fork([this, id] { return ReadAddress(id); });
  sim_.Fork([this, id] { return ReadData(id); });
}

sim::Process FunctionalMaster::WriteAddress(TrxId id) {
  const Transaction& t = trx_[id];
  sim_.Poke("aw_addr", t.addr);
  sim_.Poke("aw_len", t.len);
  sim_.Poke("aw_size", t.size);
  sim_.Poke("aw_burst", static_cast<std::uint64_t>(Burst::kIncr));
  sim_.Poke("aw_valid", 1);
  do {
    co_await sim_.Clock();
  } while (!(sim_.Sampled("aw_valid") && sim_.Sampled("aw_ready")));
  sim_.Poke("aw_valid", 0);
}

sim::Process FunctionalMaster::WriteData(TrxId id) {
  const unsigned bus_bytes = config_.bus_bytes();
  for (unsigned beat = 0; beat <= trx_[id].len; ++beat) {
    const Transaction& t = trx_[id];
    std::uint64_t beat_addr = t.addr + (std::uint64_t{beat} << t.size);
    unsigned lane = static_cast<unsigned>(beat_addr % bus_bytes);
    sim_.Poke("w_data", (t.data[beat] << (8 * lane)) & Mask(config_.data_bits));
    sim_.Poke("w_strb", (t.strobes[beat] << lane) & Mask(bus_bytes));
    sim_.Poke("w_last", beat == t.len ? 1 : 0);
    sim_.Poke("w_valid", 1);
    do {
      co_await sim_.Clock();
    } while (!(sim_.Sampled("w_valid") && sim_.Sampled("w_ready")));
  }
  sim_.Poke("w_valid", 0);
  sim_.Poke("w_last", 0);
}

sim::Process FunctionalMaster::WriteResponse(TrxId id) {
  sim_.Poke("b_ready", 1);
  do {
    co_await sim_.Clock();
  } while (!(sim_.Sampled("b_valid") && sim_.Sampled("b_ready")));
  sim_.Poke("b_ready", 0);
  trx_[id].resp = static_cast<Resp>(sim_.Sampled("b_resp"));
  trx_[id].status = TrxStatus::kComplete;
  write_in_flight_ = false;
  if (!write_queue_.empty()) {
    TrxId next = write_queue_.front();
    write_queue_.pop_front();
    StartWrite(next);
  }
}

sim::Process FunctionalMaster::ReadAddress(TrxId id) {
  const Transaction& t = trx_[id];
  sim_.Poke("ar_addr", t.addr);
  sim_.Poke("ar_len", t.len);
  sim_.Poke("ar_size", t.size);
  sim_.Poke("ar_burst", static_cast<std::uint64_t>(Burst::kIncr));
  sim_.Poke("ar_valid", 1);
  do {
    co_await sim_.Clock();
  } while (!(sim_.Sampled("ar_valid") && sim_.Sampled("ar_ready")));
  sim_.Poke("ar_valid", 0);
}

sim::Process FunctionalMaster::ReadData(TrxId id) {
  const unsigned bus_bytes = config_.bus_bytes();
  Resp worst = Resp::kOkay;
  std::vector<std::uint64_t> beats;
  sim_.Poke("r_ready", 1);
  bool last = false;
  while (!last) {
    do {
      co_await sim_.Clock();
    } while (!(sim_.Sampled("r_valid") && sim_.Sampled("r_ready")));
    const Transaction& t = trx_[id];
    std::uint64_t beat_addr = t.addr + (std::uint64_t{beats.size()} << t.size);
    unsigned lane = static_cast<unsigned>(beat_addr % bus_bytes);
    beats.push_back((sim_.Sampled("r_data") >> (8 * lane)) &
                    Mask(8u << t.size));
    auto resp = static_cast<Resp>(sim_.Sampled("r_resp"));
    if (static_cast<std::uint64_t>(resp) > static_cast<std::uint64_t>(worst)) {
      worst = resp;
    }
    last = sim_.Sampled("r_last") != 0;
  }
  sim_.Poke("r_ready", 0);
  Transaction& t = trx_[id];
  if (beats.size() != std::size_t{t.len} + 1) {
    warnings_.push_back(fmt::format("read {} returned {} beats, expected {}",
                                    id, beats.size(), t.len + 1));
  }
  t.data = std::move(beats);
  t.resp = worst;
  t.status = TrxStatus::kComplete;
  read_in_flight_ = false;
  if (!read_queue_.empty()) {
    TrxId next = read_queue_.front();
    read_queue_.pop_front();
    StartRead(next);
  }
}

// ---------------------------------------------------------------------------
// MemorySlave

MemorySlave::MemorySlave(sim::Simulator& sim, BusConfig config,
                         std::uint64_t capacity_words, LatencyPolicy latency)
    : sim_(sim),
      config_(config),
      memory_(capacity_words * config.bus_bytes(), 0),
      latency_(latency) {
  for (std::uint64_t i = 0; i < 5; ++i) {
    rngs_.emplace_back(latency.seed + 0x9e3779b97f4a7c15ULL * (i + 1));
  }
  sim_.Fork([this] { return AcceptAddress(true); });
  sim_.Fork([this] { return AcceptWriteData(); });
  sim_.Fork([this] { return SendWriteResponse(); });
  sim_.Fork([this] { return AcceptAddress(false); });
  sim_.Fork([this] { return SendReadData(); });
}

std::uint64_t MemorySlave::Latency(Rng& rng) const {
  return latency_.max_latency == 0 ? 0 : rng.Below(latency_.max_latency + 1);
}

bool MemorySlave::Fits(std::uint64_t addr, unsigned len, unsigned size) const {
  std::uint64_t bytes = (std::uint64_t{len} + 1) << size;
  return addr < memory_.size() && bytes <= memory_.size() - addr;
}

std::uint64_t MemorySlave::BeatAddress(const BurstState& b,
                                       unsigned beat) const {
  return b.addr + (std::uint64_t{beat} << b.size);
}

sim::Process MemorySlave::AcceptAddress(bool write) {
  const std::string ch = write ? "aw" : "ar";
  const std::string valid = ch + "_valid";
  const std::string ready = ch + "_ready";
  Rng& rng = rngs_[write ? 0 : 3];
  for (;;) {
    co_await sim_.Clock();
    if (!sim_.Sampled("aresetn") || !sim_.Sampled(valid)) continue;
    co_await sim_.Clock(Latency(rng));
    sim_.Poke(ready, 1);
    do {
      co_await sim_.Clock();
    } while (!(sim_.Sampled(valid) && sim_.Sampled(ready)));
    sim_.Poke(ready, 0);
    BurstState b;
    b.addr = sim_.Sampled(ch + "_addr");
    b.len = static_cast<unsigned>(sim_.Sampled(ch + "_len"));
    b.size = static_cast<unsigned>(sim_.Sampled(ch + "_size"));
    b.error = !Fits(b.addr, b.len, b.size) ||
              sim_.Sampled(ch + "_burst") != static_cast<std::uint64_t>(Burst::kIncr);
    (write ? writes_ : reads_).push_back(b);
  }
}

sim::Process MemorySlave::AcceptWriteData() {
  Rng& rng = rngs_[1];
  const unsigned bus_bytes = config_.bus_bytes();
  for (;;) {
    co_await sim_.Clock();
    if (writes_.empty() || !sim_.Sampled("aresetn")) continue;
    co_await sim_.Clock(Latency(rng));
    sim_.Poke("w_ready", 1);
    do {
      co_await sim_.Clock();
    } while (!(sim_.Sampled("w_valid") && sim_.Sampled("w_ready")));
    sim_.Poke("w_ready", 0);
    BurstState& b = writes_.front();
    if (!b.error) {
      std::uint64_t base = BeatAddress(b, b.beats_done) / bus_bytes * bus_bytes;
      std::uint64_t data = sim_.Sampled("w_data");
      std::uint64_t strb = sim_.Sampled("w_strb");
      for (unsigned lane = 0; lane < bus_bytes; ++lane) {
        if (((strb >> lane) & 1) == 0) continue;
        // Lanes outside memory can only come from a lying strobe; ignore.
        if (base + lane < memory_.size()) {
          memory_[base + lane] = static_cast<std::uint8_t>(data >> (8 * lane));
        }
      }
    }
    if (++b.beats_done == b.len + 1) {
      responses_.push_back(b.error ? Resp::kSlvErr : Resp::kOkay);
      writes_.pop_front();
    }
  }
}

sim::Process MemorySlave::SendWriteResponse() {
  Rng& rng = rngs_[2];
  for (;;) {
    co_await sim_.Clock();
    if (responses_.empty()) continue;
    co_await sim_.Clock(Latency(rng));
    sim_.Poke("b_resp", static_cast<std::uint64_t>(responses_.front()));
    sim_.Poke("b_valid", 1);
    do {
      co_await sim_.Clock();
    } while (!(sim_.Sampled("b_valid") && sim_.Sampled("b_ready")));
    sim_.Poke("b_valid", 0);
    responses_.pop_front();
  }
}

sim::Process MemorySlave::SendReadData() {
  Rng& rng = rngs_[4];
  const unsigned bus_bytes = config_.bus_bytes();
  for (;;) {
    co_await sim_.Clock();
    if (reads_.empty()) continue;
    const BurstState b = reads_.front();
    for (unsigned beat = 0; beat <= b.len; ++beat) {
      co_await sim_.Clock(Latency(rng));
      std::uint64_t data = 0;
      if (!b.error) {
        std::uint64_t base = BeatAddress(b, beat) / bus_bytes * bus_bytes;
        for (unsigned lane = 0; lane < bus_bytes; ++lane) {
          data |= std::uint64_t{memory_[base + lane]} << (8 * lane);
        }
      }
      sim_.Poke("r_data", data);
      sim_.Poke("r_resp", static_cast<std::uint64_t>(b.error ? Resp::kSlvErr
                                                             : Resp::kOkay));
      sim_.Poke("r_last", beat == b.len ? 1 : 0);
      sim_.Poke("r_valid", 1);
      do {
        co_await sim_.Clock();
      } while (!(sim_.Sampled("r_valid") && sim_.Sampled("r_ready")));
      sim_.Poke("r_valid", 0);
    }
    sim_.Poke("r_last", 0);
    reads_.pop_front();
  }
}

// ---------------------------------------------------------------------------
// HandshakeChecker

HandshakeChecker::HandshakeChecker(sim::Simulator& sim) {
  sim.AddEdgeMonitor([this](const sim::Simulator& s) { OnEdge(s); });
}

std::uint64_t HandshakeChecker::transfers(const std::string& channel) const {
  auto it = transfers_.find(channel);
  return it == transfers_.end() ? 0 : it->second;
}

void HandshakeChecker::OnEdge(const sim::Simulator& sim) {
  const std::uint64_t cycle = sim.cycle();
  for (const ChannelSpec& ch : Channels()) {
    ChannelState now;
    now.valid = sim.Peek(Sig(ch.name, "valid")) != 0;
    now.ready = sim.Peek(Sig(ch.name, "ready")) != 0;
    for (const std::string& f : ch.fields) now.payload.push_back(sim.Peek(Sig(ch.name, f)));
    ChannelState& prev = state_[ch.name];
    if (prev.valid && !prev.ready) {
      if (!now.valid) {
        violations_.push_back(fmt::format(
            "cycle {}: {} valid dropped before the handshake", cycle, ch.name));
      } else if (now.payload != prev.payload) {
        violations_.push_back(fmt::format(
            "cycle {}: {} payload changed while waiting for ready", cycle,
            ch.name));
      }
    }
    const bool fire = sim.Peek(Sig(ch.name, "fire")) != 0;
    if (fire) {
      ++transfers_[ch.name];
      if (ch.name == "aw") aw_lens_.push_back(now.payload[1]);
      if (ch.name == "ar") ar_lens_.push_back(now.payload[1]);
      if (ch.name == "w" || ch.name == "r") {
        auto& lens = ch.name == "w" ? aw_lens_ : ar_lens_;
        std::uint64_t& beats = ch.name == "w" ? w_beats_ : r_beats_;
        const bool last = now.payload[2] != 0;
        if (lens.empty()) {
          violations_.push_back(fmt::format(
              "cycle {}: {} beat without an accepted address", cycle, ch.name));
        } else {
          ++beats;
          bool final_beat = beats == lens.front() + 1;
          if (last != final_beat) {
            violations_.push_back(fmt::format(
                "cycle {}: {} beat {} of {} has last={}", cycle, ch.name, beats,
                lens.front() + 1, last ? 1 : 0));
          }
          if (final_beat || last) {
            lens.pop_front();
            beats = 0;
            if (ch.name == "w") ++w_bursts_done_;
          }
        }
      }
      if (ch.name == "b") {
        if (b_seen_ >= w_bursts_done_) {
          violations_.push_back(fmt::format(
              "cycle {}: write response before the final data beat", cycle));
        }
        ++b_seen_;
      }
    }
    prev = std::move(now);
  }
}

// ---------------------------------------------------------------------------
// ChannelTracer

ChannelTracer::ChannelTracer(sim::Simulator& sim) {
  sim.AddEdgeMonitor([this](const sim::Simulator& s) {
    for (const ChannelSpec& ch : Channels()) {
      bool valid = s.Peek(Sig(ch.name, "valid")) != 0;
      bool ready = s.Peek(Sig(ch.name, "ready")) != 0;
      if (!valid && !ready) continue;
      ChannelEvent e{s.cycle(), ch.name, valid, ready, {}};
      for (const std::string& f : ch.fields) e.payload.push_back(s.Peek(Sig(ch.name, f)));
      events_.push_back(std::move(e));
    }
  });
}

void ChannelTracer::WriteCsv(std::ostream& out) const {
  out << "cycle,channel,valid,ready,payload\n";
  for (const ChannelEvent& e : events_) {
    const ChannelSpec& spec = *std::find_if(
        Channels().begin(), Channels().end(),
        [&](const ChannelSpec& c) { return c.name == e.channel; });
    std::string payload;
    for (std::size_t i = 0; i < spec.fields.size(); ++i) {
      if (i > 0) payload += ';';
      payload += fmt::format("{}={:#x}", spec.fields[i], e.payload[i]);
    }
    out << e.cycle << ',' << e.channel << ',' << (e.valid ? 1 : 0) << ','
        << (e.ready ? 1 : 0) << ',' << payload << '\n';
  }
}

}  // namespace hwv::axi4
