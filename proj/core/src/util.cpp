#include "reeb/util.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace reeb {

namespace {
inline double bump_e(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }
inline double bump_e_deriv(double u) {
    return u > 0.0 ? std::exp(-1.0 / u) / (u * u) : 0.0;
}
}  // namespace

double smooth_step(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double a = bump_e(u), b = bump_e(1.0 - u);
    return a / (a + b);
}

double smooth_step_deriv(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    const double a = bump_e(u), b = bump_e(1.0 - u);
    const double da = bump_e_deriv(u), db = bump_e_deriv(1.0 - u);
    const double s = a + b;
    // d/du [a/(a+b)] with b' = -db
    return (da * b + a * db) / (s * s);
}

double cubic_step(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    return u * u * (3.0 - 2.0 * u);
}

double cubic_step_deriv(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    return 6.0 * u * (1.0 - u);
}

double quintic_step(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double quintic_step_deriv(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    return 30.0 * u * u * (1.0 - u) * (1.0 - u);
}

double wrap_angle(double theta) {
    double w = std::fmod(theta, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    return w;
}

std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct CsvWriter::Impl {
    std::ofstream out;
    std::size_t ncols;
};

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns)
    : impl_(new Impl) {
    impl_->out.open(path);
    if (!impl_->out) throw std::runtime_error("cannot open CSV for writing: " + path.string());
    impl_->ncols = columns.size();
    for (std::size_t i = 0; i < columns.size(); ++i)
        impl_->out << columns[i] << (i + 1 < columns.size() ? "," : "\n");
}

CsvWriter::~CsvWriter() { delete impl_; }

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != impl_->ncols) throw std::logic_error("CSV row width mismatch");
    for (std::size_t i = 0; i < values.size(); ++i)
        impl_->out << format_double(values[i]) << (i + 1 < values.size() ? "," : "\n");
}

void CsvWriter::row_mixed(const std::vector<std::string>& values) {
    if (values.size() != impl_->ncols) throw std::logic_error("CSV row width mismatch");
    for (std::size_t i = 0; i < values.size(); ++i)
        impl_->out << values[i] << (i + 1 < values.size() ? "," : "\n");
}

DirLock::DirLock(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    lock_path_ = dir / ".reeblab.lock";
    fd_ = ::open(lock_path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0)
        throw std::runtime_error("output directory is locked by another run: " + dir.string());
}

DirLock::~DirLock() {
    if (fd_ >= 0) {
        ::close(fd_);
        std::error_code ec;
        std::filesystem::remove(lock_path_, ec);
    }
}

}  // namespace reeb
