#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace reeb {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;

// C-infinity step built from e^{-1/u}: 0 for u<=0, 1 for u>=1, strictly
// increasing in between, flat to all orders at both ends.
double smooth_step(double u);
double smooth_step_deriv(double u);

// C^2 polynomial steps (cheap, enough where C-infinity is not needed).
double cubic_step(double u);         // 3u^2 - 2u^3 clamped
double cubic_step_deriv(double u);
double quintic_step(double u);       // 6u^5 - 15u^4 + 10u^3 clamped
double quintic_step_deriv(double u);

// Reduce an angle to [0, 2*pi).
double wrap_angle(double theta);

// FNV-1a, used for scenario hashes (stable across platforms/runs).
std::uint64_t fnv1a(std::string_view data);

// Shortest-format but round-trippable double printing ("%.17g").
std::string format_double(double v);

// Minimal CSV writer with deterministic formatting.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns);
    ~CsvWriter();
    void row(const std::vector<double>& values);
    void row_mixed(const std::vector<std::string>& values);

private:
    struct Impl;
    Impl* impl_;
};

// Exclusive lock on a directory (single writer per output dir).
class DirLock {
public:
    explicit DirLock(const std::filesystem::path& dir);
    ~DirLock();
    DirLock(const DirLock&) = delete;
    DirLock& operator=(const DirLock&) = delete;

private:
    std::filesystem::path lock_path_;
    int fd_ = -1;
};

}  // namespace reeb
