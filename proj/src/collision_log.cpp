#include "lfp/collision_log.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

namespace lfp {

namespace {

constexpr const char* kMagic = "lfp-collision-log";
constexpr std::size_t kRecordBytes = 3 * 4 + 2 * 8;

template <typename T>
void put_le(unsigned char* out, T value) {
  std::uint64_t bits = 0;
  if constexpr (sizeof(T) == 8) {
    bits = std::bit_cast<std::uint64_t>(value);
  } else {
    bits = static_cast<std::uint64_t>(value);
  }
  for (std::size_t b = 0; b < sizeof(T); ++b) out[b] = static_cast<unsigned char>(bits >> (8 * b));
}

template <typename T>
T get_le(const unsigned char* in) {
  std::uint64_t bits = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) bits |= static_cast<std::uint64_t>(in[b]) << (8 * b);
  if constexpr (sizeof(T) == 8) {
    return std::bit_cast<T>(bits);
  } else {
    return static_cast<T>(bits);
  }
}

}  // namespace

void CollisionLog::begin_step(std::uint32_t step) {
  if (step != step_begin_.size()) {
    throw CollisionLogError("collision log: step " + std::to_string(step) + " recorded out of order");
  }
  step_begin_.push_back(records_.size());
}

void CollisionLog::append(const CollisionRecord& r) {
  if (step_begin_.empty() || r.step + 1 != step_begin_.size()) {
    throw CollisionLogError("collision log: record does not belong to the current step");
  }
  records_.push_back(r);
}

std::span<CollisionRecord> CollisionLog::append_block(std::size_t n) {
  if (step_begin_.empty()) throw CollisionLogError("collision log: append before begin_step");
  const std::size_t start = records_.size();
  records_.resize(start + n);
  const auto step = static_cast<std::uint32_t>(step_begin_.size() - 1);
  for (std::size_t k = start; k < records_.size(); ++k) records_[k].step = step;
  return {records_.data() + start, n};
}

std::span<const CollisionRecord> CollisionLog::step_records(std::uint32_t step) const {
  if (step >= step_begin_.size()) {
    throw CollisionLogError("collision log exhausted: no records for step " + std::to_string(step) +
                            " (log holds " + std::to_string(step_begin_.size()) + " steps)");
  }
  const std::size_t begin = step_begin_[step];
  const std::size_t end = step + 1 < step_begin_.size() ? step_begin_[step + 1] : records_.size();
  return {records_.data() + begin, end - begin};
}

void CollisionLog::check_shape(std::uint32_t particles) const {
  if (particles != particles_) {
    throw CollisionLogError("collision log recorded for " + std::to_string(particles_) +
                            " particles, replay requested for " + std::to_string(particles));
  }
}

void CollisionLog::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CollisionLogError("cannot open collision log for writing: " + path.string());
  out << kMagic << ' ' << kFormatVersion << ' ' << particles_ << ' ' << steps() << ' ' << records_.size()
      << '\n';
  std::vector<unsigned char> buf(kRecordBytes * 4096);
  std::size_t fill = 0;
  for (const auto& r : records_) {
    unsigned char* p = buf.data() + fill;
    put_le(p, r.step);
    put_le(p + 4, r.i);
    put_le(p + 8, r.j);
    put_le(p + 12, r.r1);
    put_le(p + 20, r.r2);
    fill += kRecordBytes;
    if (fill == buf.size()) {
      out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(fill));
      fill = 0;
    }
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(fill));
  if (!out) throw CollisionLogError("failed writing collision log: " + path.string());
}

CollisionLog CollisionLog::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CollisionLogError("cannot open collision log: " + path.string());
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string magic;
  int version = 0;
  std::uint64_t particles = 0;
  std::uint64_t steps = 0;
  std::uint64_t count = 0;
  hs >> magic >> version >> particles >> steps >> count;
  if (!hs || magic != kMagic) throw CollisionLogError("not a collision log: " + path.string());
  if (version != kFormatVersion) {
    throw CollisionLogError("unsupported collision log version " + std::to_string(version));
  }
  CollisionLog log(static_cast<std::uint32_t>(particles));
  log.records_.resize(count);
  std::vector<unsigned char> raw(kRecordBytes * count);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw CollisionLogError("truncated collision log: " + path.string());
  }
  std::uint32_t next_step = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const unsigned char* p = raw.data() + k * kRecordBytes;
    auto& r = log.records_[k];
    r.step = get_le<std::uint32_t>(p);
    r.i = get_le<std::uint32_t>(p + 4);
    r.j = get_le<std::uint32_t>(p + 8);
    r.r1 = get_le<double>(p + 12);
    r.r2 = get_le<double>(p + 20);
    if (r.step + 1 < next_step || r.step >= steps) throw CollisionLogError("corrupt collision log: bad step order");
    while (next_step <= r.step) {
      log.step_begin_.push_back(k);
      ++next_step;
    }
  }
  while (next_step < steps) {
    log.step_begin_.push_back(count);
    ++next_step;
  }
  return log;
}

}  // namespace lfp
