#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

namespace lfp {

/// One applied collision: which pair, and the uniform draws that fixed its angles.
struct CollisionRecord {
  std::uint32_t step = 0;
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  double r1 = 0.0;
  double r2 = 0.0;

  friend bool operator==(const CollisionRecord&, const CollisionRecord&) = default;
};

class CollisionLogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The collision tree of a run, in application order, grouped by step.
///
/// File layout: one ASCII header line
///   "lfp-collision-log 1 <particles> <steps> <records>\n"
/// followed by <records> little-endian records of (u32 step, u32 i, u32 j, f64 r1, f64 r2).
class CollisionLog {
 public:
  static constexpr int kFormatVersion = 1;

  CollisionLog() = default;
  explicit CollisionLog(std::uint32_t particles) : particles_(particles) {}

  std::uint32_t particles() const noexcept { return particles_; }
  std::uint32_t steps() const noexcept { return static_cast<std::uint32_t>(step_begin_.size()); }
  std::size_t size() const noexcept { return records_.size(); }
  std::span<const CollisionRecord> records() const noexcept { return records_; }

  /// Opens the next step; steps must be recorded in order 0, 1, 2, ...
  void begin_step(std::uint32_t step);
  void append(const CollisionRecord& r);
  /// Reserves n slots in the current step and returns them for filling (used when pairs are
  /// drawn in parallel but must be stored in pair order).
  std::span<CollisionRecord> append_block(std::size_t n);

  /// Records of one step. Throws CollisionLogError if the step was never recorded.
  std::span<const CollisionRecord> step_records(std::uint32_t step) const;

  /// Throws CollisionLogError when the log was recorded for a different particle count.
  void check_shape(std::uint32_t particles) const;

  void save(const std::filesystem::path& path) const;
  static CollisionLog load(const std::filesystem::path& path);

  friend bool operator==(const CollisionLog&, const CollisionLog&) = default;

 private:
  std::uint32_t particles_ = 0;
  std::vector<std::size_t> step_begin_;
  std::vector<CollisionRecord> records_;
};

}  // namespace lfp
