#include "memcap/dataset.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>

namespace memcap {

namespace {

std::vector<unsigned char> read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DatasetError(fmt::format("cannot open {}", p.string()));
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<unsigned char>& b, std::size_t off) {
    return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) | (std::uint32_t{b[off + 2]} << 8) |
           std::uint32_t{b[off + 3]};
}

void need(const std::vector<unsigned char>& b, std::size_t bytes, const std::filesystem::path& p) {
    if (b.size() < bytes)
        throw DatasetError(fmt::format("{} is truncated: expected {} bytes, found {}", p.string(), bytes, b.size()));
}

} // namespace

Dataset load_mnist(const std::filesystem::path& images, const std::filesystem::path& labels, std::string split) {
    auto ib = read_file(images);
    auto lb = read_file(labels);
    need(ib, 16, images);
    need(lb, 8, labels);
    if (be32(ib, 0) != 2051)
        throw DatasetError(fmt::format("{}: bad magic {} (expected 2051)", images.string(), be32(ib, 0)));
    if (be32(lb, 0) != 2049)
        throw DatasetError(fmt::format("{}: bad magic {} (expected 2049)", labels.string(), be32(lb, 0)));
    std::size_t n = be32(ib, 4), rows = be32(ib, 8), cols = be32(ib, 12);
    std::size_t nl = be32(lb, 4);
    if (rows != 28 || cols != 28)
        throw DatasetError(fmt::format("{}: images are {}x{}, expected 28x28", images.string(), rows, cols));
    if (n != nl)
        throw DatasetError(fmt::format("count mismatch: {} images but {} labels", n, nl));
    std::size_t expect_i = 16 + n * rows * cols, expect_l = 8 + n;
    need(ib, expect_i, images);
    need(lb, expect_l, labels);
    if (ib.size() != expect_i)
        throw DatasetError(fmt::format("{}: expected {} bytes, found {}", images.string(), expect_i, ib.size()));
    if (lb.size() != expect_l)
        throw DatasetError(fmt::format("{}: expected {} bytes, found {}", labels.string(), expect_l, lb.size()));
    Dataset d;
    d.rows = rows;
    d.cols = cols;
    d.split = std::move(split);
    d.pixels.resize(n * rows * cols);
    for (std::size_t k = 0; k < d.pixels.size(); ++k) d.pixels[k] = ib[16 + k] / 255.0;
    d.labels.assign(lb.begin() + 8, lb.end());
    for (std::size_t k = 0; k < n; ++k)
        if (d.labels[k] > 9) throw DatasetError(fmt::format("{}: label {} at index {} is not a digit", labels.string(), int(d.labels[k]), k));
    return d;
}

Dataset load_mnist_split(const std::filesystem::path& dir, std::string_view split) {
    std::string stem;
    if (split == "train")
        stem = "train";
    else if (split == "test")
        stem = "t10k";
    else
        throw DatasetError(fmt::format("unknown split '{}' (expected train or test)", split));
    return load_mnist(dir / (stem + "-images-idx3-ubyte"), dir / (stem + "-labels-idx1-ubyte"), std::string(split));
}

void Encoder::validate(const Dataset& d) const {
    if (!(scale >= 0 && std::isfinite(scale))) throw DatasetError("encoder scale must be non-negative");
    if (strategy == Strategy::Patch && (patch == 0 || d.rows % patch != 0 || d.cols % patch != 0))
        throw DatasetError(fmt::format("patch size {} does not tile a {}x{} image", patch, d.rows, d.cols));
}

std::size_t Encoder::dimension(const Dataset& d) const {
    if (strategy == Strategy::Raw) return d.image_size();
    return (d.rows / patch) * (d.cols / patch);
}

std::vector<double> Encoder::encode(const Dataset& d, std::size_t k) const {
    const double* img = d.image(k);
    if (strategy == Strategy::Raw) {
        std::vector<double> out(img, img + d.image_size());
        for (double& x : out) x *= scale;
        return out;
    }
    std::size_t pr = d.rows / patch, pc = d.cols / patch;
    std::vector<double> out(pr * pc, 0.0);
    double inv = scale / static_cast<double>(patch * patch);
    for (std::size_t r = 0; r < d.rows; ++r)
        for (std::size_t c = 0; c < d.cols; ++c) out[(r / patch) * pc + c / patch] += img[r * d.cols + c] * inv;
    return out;
}

Encoder parse_encoder(std::string_view name, double scale) {
    Encoder e;
    e.scale = scale;
    if (name == "raw") return e;
    if (name.substr(0, 5) == "patch") {
        auto digits = name.substr(5);
        std::size_t k = 0;
        auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
        if (ec == std::errc{} && p == digits.data() + digits.size() && k > 0) {
            e.strategy = Encoder::Strategy::Patch;
            e.patch = k;
            return e;
        }
    }
    throw DatasetError(fmt::format("unknown encoder '{}' (expected raw or patch<k>)", name));
}

} // namespace memcap
