#ifndef HEBB_NUMERICS_HPP
#define HEBB_NUMERICS_HPP

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace hebb {

using vec = std::vector<double>;

// Dense row-major matrix of doubles.
class matrix {
public:
    matrix() = default;
    matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill)
    {
        if (rows <= 0 || cols <= 0)
            throw std::invalid_argument("matrix: dimensions must be positive");
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    size_t size() const { return data_.size(); }

    bool operator==(const matrix&) const = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

// Deterministic random source. The generator is mt19937_64, which the C++
// standard pins down bit-exactly on every platform. Gaussian draws use the
// Marsaglia polar method implemented here rather than std::normal_distribution,
// whose output sequence is implementation defined.
class random_source {
public:
    explicit random_source(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1)
    double next_unit() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // standard normal, Marsaglia polar method
    double next_gaussian();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

namespace numerics {

// y = W x
vec matvec(const matrix& w, const vec& x);

// result[j][k] = post[j] * pre[k]
matrix outer(const vec& post, const vec& pre);

vec relu(const vec& x);

// step(0) = 0
vec step(const vec& x);

double l2_norm(const vec& x);

double euclidean_distance(const vec& a, const vec& b);

// zero-norm operand yields similarity 0
double cosine_similarity(const vec& a, const vec& b);

// Gaussian entries, mean 0, std sqrt(2 / fan_in), fan_in = cols.
matrix he_init(int rows, int cols, random_source& rng);

} // namespace numerics
} // namespace hebb

#endif
