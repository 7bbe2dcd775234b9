#ifndef HEBB_MNIST_IO_HPP
#define HEBB_MNIST_IO_HPP

#include "hebb/numerics.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hebb::mnist {

constexpr int image_side = 28;
constexpr int image_dim = image_side * image_side;
constexpr int num_labels = 10;
constexpr uint32_t image_magic = 2051;
constexpr uint32_t label_magic = 2049;

struct idx_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct format_error : idx_error {
    using idx_error::idx_error;
};
struct length_error : idx_error {
    using idx_error::idx_error;
};
struct range_error : idx_error {
    using idx_error::idx_error;
};

struct raw_image_set {
    uint32_t count = 0;
    std::vector<uint8_t> pixels; // count * 784 bytes
};

struct raw_label_set {
    uint32_t count = 0;
    std::vector<uint8_t> labels;
};

raw_image_set parse_idx_images(const std::vector<uint8_t>& bytes);
raw_label_set parse_idx_labels(const std::vector<uint8_t>& bytes);

// Inverse of the parsers; reproduces the original IDX bytes exactly.
std::vector<uint8_t> serialize_idx_images(const raw_image_set& s);
std::vector<uint8_t> serialize_idx_labels(const raw_label_set& s);

// Reads a file, transparently inflating it when it starts with the gzip magic.
std::vector<uint8_t> read_file_maybe_gzip(const std::string& path);

enum class provenance { train, test };

struct prepared_dataset {
    std::array<std::vector<vec>, num_labels> per_label;
    provenance origin = provenance::train;
    bool normalized = false;
    size_t dropped_zero_images = 0;

    size_t total() const {
        size_t n = 0;
        for (const auto& bucket : per_label)
            n += bucket.size();
        return n;
    }
};

// Scales pixels to [0,1], partitions by label in file order, keeps the first
// `cap` samples per label when set, rescales each vector to unit L2 norm when
// `normalize` is set. All-zero images are dropped when normalizing.
prepared_dataset prepare(const raw_image_set& images, const raw_label_set& labels,
                         std::optional<size_t> cap, bool normalize);

struct half_split_result {
    prepared_dataset learning_half;
    prepared_dataset averaging_half;
};

// Per-label seeded random split; the learning half gets the extra sample when
// a bucket has odd size.
half_split_result half_split(const prepared_dataset& d, random_source& rng);

// Debug dump: one row per sample, label then 784 values.
void dump_csv(const prepared_dataset& d, const std::string& path);

} // namespace hebb::mnist

#endif
