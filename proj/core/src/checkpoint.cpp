// Copyright 2026 The QattenLab Authors
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

#include "qattenlab/checkpoint.hpp"

#include <zlib.h>

#include <cstdio>
#include <cstring>
#include <fstream>

#include "qattenlab/error.hpp"

namespace qattenlab {
namespace {

constexpr char kMagic[8] = {'Q', 'L', 'C', 'K', 'P', 'T', '0', '1'};

// The payload is built in (and decoded from) a flat byte buffer; integers
// and doubles are stored in the host's native little-endian layout.
class Writer {
 public:
  void u8(uint8_t v) { bytes_.push_back(static_cast<char>(v)); }
  void u32(uint32_t v) { raw(&v, sizeof v); }
  void u64(uint64_t v) { raw(&v, sizeof v); }
  void i32(int32_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(const std::string& s) {
    u32(static_cast<uint32_t>(s.size()));
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }
  void doubles(const std::vector<double>& v) {
    raw(v.data(), v.size() * sizeof(double));
  }
  void array(const Array& a) {
    u32(static_cast<uint32_t>(a.shape.size()));
    for (int d : a.shape) i32(d);
    doubles(a.data);
  }
  const std::vector<char>& bytes() const { return bytes_; }

 private:
  void raw(const void* p, size_t n) {
    if (n == 0) return;
    const char* c = static_cast<const char*>(p);
    bytes_.insert(bytes_.end(), c, c + n);
  }
  std::vector<char> bytes_;
};

class Reader {
 public:
  Reader(const char* data, size_t size) : data_(data), size_(size) {}

  uint8_t u8() { return static_cast<uint8_t>(take(1)[0]); }
  uint32_t u32() { return fixed<uint32_t>(); }
  uint64_t u64() { return fixed<uint64_t>(); }
  int32_t i32() { return fixed<int32_t>(); }
  double f64() { return fixed<double>(); }
  std::string str() {
    const uint32_t n = u32();
    const char* p = take(n);
    return std::string(p, n);
  }
  Array array() {
    const uint32_t rank = u32();
    if (rank > 4) throw IoError("checkpoint: implausible array rank");
    std::vector<int> shape;
    long long volume = 1;
    for (uint32_t i = 0; i < rank; ++i) {
      const int d = i32();
      if (d < 0) throw IoError("checkpoint: negative dimension");
      shape.push_back(d);
      volume *= d;
    }
    std::vector<double> data(static_cast<size_t>(volume));
    if (!data.empty()) {
      std::memcpy(data.data(), take(data.size() * sizeof(double)),
                  data.size() * sizeof(double));
    }
    return Array::from(std::move(shape), std::move(data));
  }
  bool done() const { return pos_ == size_; }

 private:
  template <typename T>
  T fixed() {
    T v;
    std::memcpy(&v, take(sizeof v), sizeof v);
    return v;
  }
  const char* take(size_t n) {
    if (pos_ + n > size_) throw IoError("checkpoint: truncated payload");
    const char* p = data_ + pos_;
    pos_ += n;
    return p;
  }
  const char* data_;
  size_t size_;
  size_t pos_ = 0;
};

void write_episode(Writer& w, const Episode& e) {
  w.u32(static_cast<uint32_t>(e.steps.size()));
  for (const EpisodeStep& s : e.steps) {
    w.array(s.obs);
    w.array(s.state);
    w.u32(static_cast<uint32_t>(s.masks.size()));
    for (uint8_t m : s.masks) w.u8(m);
    w.u32(static_cast<uint32_t>(s.actions.size()));
    for (int a : s.actions) w.i32(a);
    for (int a : s.last_actions) w.i32(a);
    w.f64(s.reward);
    w.u8(s.terminal ? 1 : 0);
    w.u8(s.truncated ? 1 : 0);
    w.u8(s.padded ? 1 : 0);
  }
}

Episode read_episode(Reader& r) {
  Episode e;
  const uint32_t n_steps = r.u32();
  e.steps.reserve(n_steps);
  for (uint32_t t = 0; t < n_steps; ++t) {
    EpisodeStep s;
    s.obs = r.array();
    s.state = r.array();
    const uint32_t n_masks = r.u32();
    s.masks.resize(n_masks);
    for (uint32_t i = 0; i < n_masks; ++i) s.masks[i] = r.u8();
    const uint32_t n_agents = r.u32();
    s.actions.resize(n_agents);
    s.last_actions.resize(n_agents);
    for (uint32_t i = 0; i < n_agents; ++i) s.actions[i] = r.i32();
    for (uint32_t i = 0; i < n_agents; ++i) s.last_actions[i] = r.i32();
    s.reward = r.f64();
    s.terminal = r.u8() != 0;
    s.truncated = r.u8() != 0;
    s.padded = r.u8() != 0;
    e.steps.push_back(std::move(s));
  }
  return e;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  Writer w;
  w.u32(static_cast<uint32_t>(ckpt.arrays.size()));
  for (const auto& [name, a] : ckpt.arrays) {
    w.str(name);
    w.array(a);
  }
  w.u32(static_cast<uint32_t>(ckpt.counters.size()));
  for (const auto& [name, v] : ckpt.counters) {
    w.str(name);
    w.u64(v);
  }
  w.u32(static_cast<uint32_t>(ckpt.scalars.size()));
  for (const auto& [name, v] : ckpt.scalars) {
    w.str(name);
    w.f64(v);
  }
  w.u32(static_cast<uint32_t>(ckpt.text.size()));
  for (const auto& [name, v] : ckpt.text) {
    w.str(name);
    w.str(v);
  }
  w.u8(ckpt.has_buffer ? 1 : 0);
  if (ckpt.has_buffer) {
    w.u32(static_cast<uint32_t>(ckpt.buffer.size()));
    for (const Episode& e : ckpt.buffer) write_episode(w, e);
  }

  const std::vector<char>& payload = w.bytes();
  const uint32_t crc = static_cast<uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(payload.data()),
            static_cast<uInt>(payload.size())));

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("checkpoint: cannot open " + tmp + " for writing");
    out.write(kMagic, sizeof kMagic);
    const uint32_t version = ckpt.version;
    const uint64_t size = payload.size();
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    out.write(reinterpret_cast<const char*>(&size), sizeof size);
    out.write(reinterpret_cast<const char*>(&crc), sizeof crc);
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw IoError("checkpoint: write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw IoError("checkpoint: cannot move " + tmp + " into place");
  }
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("checkpoint: cannot open " + path);
  char magic[sizeof kMagic];
  uint32_t version = 0;
  uint64_t size = 0;
  uint32_t crc = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&size), sizeof size);
  in.read(reinterpret_cast<char*>(&crc), sizeof crc);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw IoError("checkpoint: " + path + " is not a checkpoint file");
  }
  if (version != Checkpoint::kVersion) {
    throw IoError("checkpoint: unsupported version " + std::to_string(version));
  }
  std::vector<char> payload(size);
  in.read(payload.data(), static_cast<std::streamsize>(size));
  if (!in || in.gcount() != static_cast<std::streamsize>(size)) {
    throw IoError("checkpoint: " + path + " is truncated");
  }
  const uint32_t actual = static_cast<uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(payload.data()),
            static_cast<uInt>(payload.size())));
  if (actual != crc) {
    throw IoError("checkpoint: " + path + " failed its checksum");
  }

  Reader r(payload.data(), payload.size());
  Checkpoint ckpt;
  ckpt.version = version;
  const uint32_t n_arrays = r.u32();
  for (uint32_t i = 0; i < n_arrays; ++i) {
    std::string name = r.str();
    ckpt.arrays.emplace(std::move(name), r.array());
  }
  const uint32_t n_counters = r.u32();
  for (uint32_t i = 0; i < n_counters; ++i) {
    std::string name = r.str();
    ckpt.counters.emplace(std::move(name), r.u64());
  }
  const uint32_t n_scalars = r.u32();
  for (uint32_t i = 0; i < n_scalars; ++i) {
    std::string name = r.str();
    ckpt.scalars.emplace(std::move(name), r.f64());
  }
  const uint32_t n_text = r.u32();
  for (uint32_t i = 0; i < n_text; ++i) {
    std::string name = r.str();
    ckpt.text.emplace(std::move(name), r.str());
  }
  ckpt.has_buffer = r.u8() != 0;
  if (ckpt.has_buffer) {
    const uint32_t n_episodes = r.u32();
    ckpt.buffer.reserve(n_episodes);
    for (uint32_t i = 0; i < n_episodes; ++i) {
      ckpt.buffer.push_back(read_episode(r));
    }
  }
  if (!r.done()) throw IoError("checkpoint: trailing bytes after payload");
  return ckpt;
}

}  // namespace qattenlab
