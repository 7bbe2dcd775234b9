#include "hebb/numerics.hpp"

#include <cmath>

namespace hebb {

double random_source::next_gaussian()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * next_unit() - 1.0;
        v = 2.0 * next_unit() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

namespace numerics {

vec matvec(const matrix& w, const vec& x)
{
    if (static_cast<size_t>(w.cols()) != x.size())
        throw std::invalid_argument("matvec: dimension mismatch");
    vec y(w.rows());
    const double* row = w.data();
    const double* xp = x.data();
    const int n = w.cols();
    for (int j = 0; j < w.rows(); ++j, row += n) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k)
            acc += row[k] * xp[k];
        y[j] = acc;
    }
    return y;
}

matrix outer(const vec& post, const vec& pre)
{
    matrix m(static_cast<int>(post.size()), static_cast<int>(pre.size()));
    double* out = m.data();
    for (size_t j = 0; j < post.size(); ++j)
        for (size_t k = 0; k < pre.size(); ++k)
            *out++ = post[j] * pre[k];
    return m;
}

vec relu(const vec& x)
{
    vec y(x.size());
    for (size_t i = 0; i < x.size(); ++i)
        y[i] = x[i] > 0.0 ? x[i] : 0.0;
    return y;
}

vec step(const vec& x)
{
    vec y(x.size());
    for (size_t i = 0; i < x.size(); ++i)
        y[i] = x[i] > 0.0 ? 1.0 : 0.0;
    return y;
}

double l2_norm(const vec& x)
{
    double s = 0.0;
    for (double v : x)
        s += v * v;
    return std::sqrt(s);
}

double euclidean_distance(const vec& a, const vec& b)
{
    if (a.size() != b.size())
        throw std::invalid_argument("euclidean_distance: dimension mismatch");
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double cosine_similarity(const vec& a, const vec& b)
{
    if (a.size() != b.size())
        throw std::invalid_argument("cosine_similarity: dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0)
        return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

matrix he_init(int rows, int cols, random_source& rng)
{
    matrix m(rows, cols);
    const double stddev = std::sqrt(2.0 / cols);
    double* p = m.data();
    for (size_t i = 0; i < m.size(); ++i)
        p[i] = stddev * rng.next_gaussian();
    return m;
}

} // namespace numerics
} // namespace hebb
