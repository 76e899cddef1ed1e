#pragma once

// MNIST IDX ingestion and input encoders.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace memcap {

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Dataset {
    std::size_t rows = 28;
    std::size_t cols = 28;
    std::vector<double> pixels;        // count * rows * cols, scaled to [0, 1]
    std::vector<std::uint8_t> labels;  // 0..9
    std::string split;                 // "train" or "test"

    [[nodiscard]] std::size_t size() const { return labels.size(); }
    [[nodiscard]] std::size_t image_size() const { return rows * cols; }
    [[nodiscard]] const double* image(std::size_t k) const { return pixels.data() + k * image_size(); }
};

/// Reads an IDX image file (magic 2051) and its label file (magic 2049).
Dataset load_mnist(const std::filesystem::path& images, const std::filesystem::path& labels,
                   std::string split = "train");
/// Loads `<dir>/train-*` or `<dir>/t10k-*` for split "train" or "test".
Dataset load_mnist_split(const std::filesystem::path& dir, std::string_view split);

/// Turns pixels into non-negative row voltages in [0, scale].
struct Encoder {
    enum class Strategy { Raw, Patch };
    Strategy strategy = Strategy::Raw;
    std::size_t patch = 1; // side of the averaging window (Patch only)
    double scale = 0.5;    // V for a full-intensity input

    [[nodiscard]] std::size_t dimension(const Dataset& d) const;
    [[nodiscard]] std::vector<double> encode(const Dataset& d, std::size_t k) const;
    void validate(const Dataset& d) const;
};

/// Parses "raw" or "patch<k>" (e.g. "patch2").
Encoder parse_encoder(std::string_view name, double scale);

} // namespace memcap
