#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace xpd {

enum class ErrorCode {
  point_at_infinity,
  depth_out_of_range,
  undefined_ratio,
  singular_matrix,
  invalid_spec,
  geometry_mismatch,
  space_mismatch,
  dimension_mismatch,
  invalid_geometry,
  degenerate_object,
  format_error,
  io_error,
};

inline const char* error_name(ErrorCode c)
{
  switch (c) {
    case ErrorCode::point_at_infinity:  return "PointAtInfinity";
    case ErrorCode::depth_out_of_range: return "DepthOutOfRange";
    case ErrorCode::undefined_ratio:    return "UndefinedRatio";
    case ErrorCode::singular_matrix:    return "SingularMatrix";
    case ErrorCode::invalid_spec:       return "InvalidSpec";
    case ErrorCode::geometry_mismatch:  return "GeometryMismatch";
    case ErrorCode::space_mismatch:     return "SpaceMismatch";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::invalid_geometry:   return "InvalidGeometry";
    case ErrorCode::degenerate_object:  return "DegenerateObject";
    case ErrorCode::format_error:       return "FormatError";
    case ErrorCode::io_error:           return "IoError";
  }
  return "UnknownError";
}

/// Exception carrying a machine-readable category next to the message.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code)
  {
  }
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what)
{
  throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what)
{
  if (!cond) fail(code, what);
}

// Deterministic uniform draws on top of mt19937_64. The standard distribution
// objects are implementation-defined bit-for-bit; these mappings are not.
inline double uniform01(std::mt19937_64& rng)
{
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi)
{
  return lo + (hi - lo) * uniform01(rng);
}

/// Uniform integer on the closed range [lo, hi].
inline std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi)
{
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<std::int64_t>(rng() % span);
}

/// Runs fn(i) for i in [0, n) on a small thread pool. Callers must write to
/// disjoint state per index.
template <class F>
void parallel_for(int n, F&& fn)
{
  const unsigned hw = std::thread::hardware_concurrency();
  const int workers = static_cast<int>(hw == 0 ? 1 : hw);
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (int i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace xpd
