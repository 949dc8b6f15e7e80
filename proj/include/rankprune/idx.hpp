#pragma once
// MNIST IDX ingestion (big-endian headers; images 0x00000803, labels 0x00000801).

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rankprune/data_model.hpp"

namespace rankprune {

struct IdxImages {
    std::size_t count = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> pixels;  // count * rows * cols, row-major
};

IdxImages parse_idx_images(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);

// Pixels scaled to [0,1]. With `digit` set, labels become one-vs-rest
// (1 where the digit matches); otherwise the raw digit must already be 0/1.
// The same binary labels are stored as observed and hidden labels.
Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path,
                       std::optional<int> digit, std::size_t max_examples = 0);
Dataset mnist_dataset(const IdxImages& images, std::span<const std::uint8_t> labels,
                      std::optional<int> digit, std::size_t max_examples = 0);

}  // namespace rankprune
