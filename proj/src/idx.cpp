#include "rankprune/idx.hpp"

#include <fstream>
#include <iterator>

#include "rankprune/errors.hpp"

namespace rankprune {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
    if (bytes.size() < offset + 4) throw Error(ErrorCode::TruncatedFile, "IDX header is truncated");
    return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
           (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void expect_magic(std::span<const std::uint8_t> bytes, std::uint32_t want) {
    const auto got = read_be32(bytes, 0);
    if (got != want) {
        throw Error(ErrorCode::BadMagic, "IDX magic " + std::to_string(got) + ", expected " +
                                             std::to_string(want));
    }
}

}  // namespace

IdxImages parse_idx_images(std::span<const std::uint8_t> bytes) {
    expect_magic(bytes, kImagesMagic);
    IdxImages img;
    img.count = read_be32(bytes, 4);
    img.rows = read_be32(bytes, 8);
    img.cols = read_be32(bytes, 12);
    const auto payload = img.count * img.rows * img.cols;
    if (bytes.size() < 16 + payload) {
        throw Error(ErrorCode::TruncatedFile, "IDX image payload shorter than header claims");
    }
    img.pixels.assign(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(payload));
    return img;
}

std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes) {
    expect_magic(bytes, kLabelsMagic);
    const std::size_t count = read_be32(bytes, 4);
    if (bytes.size() < 8 + count) {
        throw Error(ErrorCode::TruncatedFile, "IDX label payload shorter than header claims");
    }
    return {bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(count)};
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Dataset mnist_dataset(const IdxImages& images, std::span<const std::uint8_t> labels,
                      std::optional<int> digit, std::size_t max_examples) {
    if (labels.size() != images.count) {
        throw Error(ErrorCode::LengthMismatch, "image and label counts differ");
    }
    std::size_t n = images.count;
    if (max_examples > 0) n = std::min(n, max_examples);
    const std::size_t m = images.rows * images.cols;
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    Labels y(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                images.pixels[i * m + j] / 255.0;
        }
        y[i] = digit ? (labels[i] == *digit ? 1 : 0) : labels[i];
    }
    Labels s = y;
    return Dataset(std::move(x), std::move(s), std::move(y));
}

Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path,
                       std::optional<int> digit, std::size_t max_examples) {
    const auto images = parse_idx_images(read_file_bytes(images_path));
    const auto labels = parse_idx_labels(read_file_bytes(labels_path));
    return mnist_dataset(images, labels, digit, max_examples);
}

}  // namespace rankprune
