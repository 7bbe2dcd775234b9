#include "hebb/mnist_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace hebb::mnist {

namespace {

uint32_t read_be32(const uint8_t* p)
{
    return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | uint32_t(p[3]);
}

void write_be32(std::vector<uint8_t>& out, uint32_t v)
{
    out.push_back(uint8_t(v >> 24));
    out.push_back(uint8_t(v >> 16));
    out.push_back(uint8_t(v >> 8));
    out.push_back(uint8_t(v));
}

std::vector<uint8_t> gunzip(const std::vector<uint8_t>& in)
{
    z_stream zs{};
    // 16+MAX_WBITS selects gzip decoding
    if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK)
        throw std::runtime_error("gunzip: inflateInit2 failed");
    std::vector<uint8_t> out;
    out.reserve(in.size() * 4);
    std::array<uint8_t, 1 << 16> buf;
    zs.next_in = const_cast<uint8_t*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        zs.next_out = buf.data();
        zs.avail_out = static_cast<uInt>(buf.size());
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw std::runtime_error("gunzip: corrupt stream");
        }
        out.insert(out.end(), buf.data(), buf.data() + (buf.size() - zs.avail_out));
    }
    inflateEnd(&zs);
    return out;
}

} // namespace

raw_image_set parse_idx_images(const std::vector<uint8_t>& bytes)
{
    if (bytes.size() < 16)
        throw length_error("idx images: header truncated");
    const uint32_t magic = read_be32(bytes.data());
    if (magic != image_magic)
        throw format_error("idx images: bad magic " + std::to_string(magic));
    const uint32_t count = read_be32(bytes.data() + 4);
    const uint32_t rows = read_be32(bytes.data() + 8);
    const uint32_t cols = read_be32(bytes.data() + 12);
    if (rows != image_side || cols != image_side)
        throw format_error("idx images: unsupported shape " + std::to_string(rows) + "x" + std::to_string(cols));
    const size_t expected = 16 + size_t(count) * image_dim;
    if (bytes.size() != expected)
        throw length_error("idx images: payload length " + std::to_string(bytes.size() - 16) +
                           ", expected " + std::to_string(expected - 16));
    raw_image_set s;
    s.count = count;
    s.pixels.assign(bytes.begin() + 16, bytes.end());
    return s;
}

raw_label_set parse_idx_labels(const std::vector<uint8_t>& bytes)
{
    if (bytes.size() < 8)
        throw length_error("idx labels: header truncated");
    const uint32_t magic = read_be32(bytes.data());
    if (magic != label_magic)
        throw format_error("idx labels: bad magic " + std::to_string(magic));
    const uint32_t count = read_be32(bytes.data() + 4);
    if (bytes.size() != 8 + size_t(count))
        throw length_error("idx labels: payload length mismatch");
    raw_label_set s;
    s.count = count;
    s.labels.assign(bytes.begin() + 8, bytes.end());
    for (uint8_t l : s.labels)
        if (l >= num_labels)
            throw range_error("idx labels: label value " + std::to_string(int(l)) + " out of range");
    return s;
}

std::vector<uint8_t> serialize_idx_images(const raw_image_set& s)
{
    std::vector<uint8_t> out;
    out.reserve(16 + s.pixels.size());
    write_be32(out, image_magic);
    write_be32(out, s.count);
    write_be32(out, image_side);
    write_be32(out, image_side);
    out.insert(out.end(), s.pixels.begin(), s.pixels.end());
    return out;
}

std::vector<uint8_t> serialize_idx_labels(const raw_label_set& s)
{
    std::vector<uint8_t> out;
    out.reserve(8 + s.labels.size());
    write_be32(out, label_magic);
    write_be32(out, s.count);
    out.insert(out.end(), s.labels.begin(), s.labels.end());
    return out;
}

std::vector<uint8_t> read_file_maybe_gzip(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b)
        return gunzip(bytes);
    return bytes;
}

prepared_dataset prepare(const raw_image_set& images, const raw_label_set& labels,
                         std::optional<size_t> cap, bool normalize)
{
    if (images.count != labels.count)
        throw std::invalid_argument("prepare: image/label count mismatch");
    prepared_dataset d;
    d.normalized = normalize;
    for (uint32_t i = 0; i < images.count; ++i) {
        const int label = labels.labels[i];
        auto& bucket = d.per_label[label];
        if (cap && bucket.size() >= *cap)
            continue;
        const uint8_t* px = images.pixels.data() + size_t(i) * image_dim;
        vec v(image_dim);
        for (int k = 0; k < image_dim; ++k)
            v[k] = px[k] / 255.0;
        if (normalize) {
            const double n = numerics::l2_norm(v);
            if (n == 0.0) {
                ++d.dropped_zero_images;
                std::fprintf(stderr, "warning: dropping all-zero image at index %u (label %d)\n", i, label);
                continue;
            }
            for (double& x : v)
                x /= n;
        }
        bucket.push_back(std::move(v));
    }
    return d;
}

half_split_result half_split(const prepared_dataset& d, random_source& rng)
{
    half_split_result r;
    r.learning_half.origin = r.averaging_half.origin = d.origin;
    r.learning_half.normalized = r.averaging_half.normalized = d.normalized;
    for (int label = 0; label < num_labels; ++label) {
        const auto& bucket = d.per_label[label];
        std::vector<size_t> idx(bucket.size());
        for (size_t i = 0; i < idx.size(); ++i)
            idx[i] = i;
        // Fisher-Yates with our own generator; std::shuffle's permutation is
        // implementation defined.
        for (size_t i = idx.size(); i > 1; --i) {
            const size_t j = size_t(rng.next_u64() % i);
            std::swap(idx[i - 1], idx[j]);
        }
        const size_t learn_n = (bucket.size() + 1) / 2;
        std::vector<size_t> learn(idx.begin(), idx.begin() + learn_n);
        std::vector<size_t> avg(idx.begin() + learn_n, idx.end());
        // keep file order within each half
        std::sort(learn.begin(), learn.end());
        std::sort(avg.begin(), avg.end());
        for (size_t i : learn)
            r.learning_half.per_label[label].push_back(bucket[i]);
        for (size_t i : avg)
            r.averaging_half.per_label[label].push_back(bucket[i]);
    }
    return r;
}

void dump_csv(const prepared_dataset& d, const std::string& path)
{
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot write " + path);
    for (int label = 0; label < num_labels; ++label) {
        for (const vec& v : d.per_label[label]) {
            f << label;
            char buf[32];
            for (double x : v) {
                std::snprintf(buf, sizeof buf, ",%.17g", x);
                f << buf;
            }
            f << '\n';
        }
    }
}

} // namespace hebb::mnist
