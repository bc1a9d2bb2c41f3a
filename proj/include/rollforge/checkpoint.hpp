#pragma once

#include <cstdint>
#include <fstream>
#include <string>

#include "rollforge/nn.hpp"

namespace rollforge::nn {

// Binary checkpoint: named blocks with shapes and raw little-endian 32-bit
// floats. Round-trips bit-exactly. Callers keep an adjacent JSON manifest
// describing architecture and training config.

inline constexpr char kCheckpointMagic[8] = {'R', 'F', 'C', 'K', 'P', 'T', '0', '1'};

inline void save_checkpoint(const ParamStore<float>& ps, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  const uint32_t n = static_cast<uint32_t>(ps.blocks().size());
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  for (const auto* p : ps.blocks()) {
    const uint32_t len = static_cast<uint32_t>(p->name.size());
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(p->name.data(), len);
    const uint32_t rows = static_cast<uint32_t>(p->w.rows());
    const uint32_t cols = static_cast<uint32_t>(p->w.cols());
    out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
    out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
    out.write(reinterpret_cast<const char*>(p->w.data()),
              static_cast<std::streamsize>(sizeof(float) * p->count()));
  }
  if (!out) throw std::runtime_error("short write: " + path);
}

inline void load_checkpoint(ParamStore<float>& ps, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::string(magic, 8) != std::string(kCheckpointMagic, 8))
    throw std::invalid_argument("bad checkpoint magic: " + path);
  uint32_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  if (n != ps.blocks().size())
    throw std::invalid_argument("checkpoint block count mismatch: " + path);
  for (auto* p : ps.blocks()) {
    uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    std::string name(len, '\0');
    in.read(name.data(), len);
    uint32_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
    in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
    if (name != p->name || rows != p->w.rows() || cols != p->w.cols())
      throw std::invalid_argument("checkpoint block mismatch at " + p->name + " vs " + name);
    in.read(reinterpret_cast<char*>(p->w.data()),
            static_cast<std::streamsize>(sizeof(float) * p->count()));
  }
  if (!in) throw std::invalid_argument("truncated checkpoint: " + path);
}

}  // namespace rollforge::nn
