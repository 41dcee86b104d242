#include "sketchcbr/metrics.hpp"

#include <cmath>
#include <vector>

namespace sketchcbr {

namespace {

// H = ln(N) - (1/N) * sum(c ln c), in nats.
double entropy_from_counts(const std::vector<std::uint32_t>& counts, double total) {
    double acc = 0.0;
    for (const std::uint32_t c : counts) {
        if (c > 0) acc += static_cast<double>(c) * std::log(static_cast<double>(c));
    }
    return std::log(total) - acc / total;
}

double nmi_from_joint(const std::vector<std::uint32_t>& joint, int bins, double total) {
    std::vector<std::uint32_t> ma(bins, 0), mb(bins, 0);
    for (int i = 0; i < bins; ++i) {
        for (int j = 0; j < bins; ++j) {
            const std::uint32_t c = joint[static_cast<std::size_t>(i) * bins + j];
            ma[i] += c;
            mb[j] += c;
        }
    }
    const double hab = entropy_from_counts(joint, total);
    if (hab <= 0.0) return 1.0;  // both images constant over the compared pixels
    const double ha = entropy_from_counts(ma, total);
    const double hb = entropy_from_counts(mb, total);
    return (ha + hb) / hab;
}

inline int intensity_bin(std::uint8_t v, int bins) {
    return static_cast<int>(v) * bins / 256;
}

}  // namespace

double nmi(const ImageGray& a, const ImageGray& b, int bins) {
    if (!a.same_dims(b)) throw DimensionError("nmi: image dimensions differ");
    if (a.data.empty()) throw DimensionError("nmi: empty images");
    std::vector<std::uint32_t> joint(static_cast<std::size_t>(bins) * bins, 0);
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        ++joint[static_cast<std::size_t>(intensity_bin(a.data[i], bins)) * bins +
                intensity_bin(b.data[i], bins)];
    }
    return nmi_from_joint(joint, bins, static_cast<double>(a.data.size()));
}

double nmi_masked(const ImageGray& a, std::span<const std::uint8_t> mask_a, const ImageGray& b,
                  std::span<const std::uint8_t> mask_b, int bins) {
    if (!a.same_dims(b)) throw DimensionError("nmi: image dimensions differ");
    if (mask_a.size() != a.data.size() || mask_b.size() != b.data.size()) {
        throw DimensionError("nmi: mask size does not match image");
    }
    std::vector<std::uint32_t> joint(static_cast<std::size_t>(bins) * bins, 0);
    std::size_t total = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        if (!mask_a[i] || !mask_b[i]) continue;
        ++joint[static_cast<std::size_t>(intensity_bin(a.data[i], bins)) * bins +
                intensity_bin(b.data[i], bins)];
        ++total;
    }
    if (total == 0) return 1.0;  // disjoint masks share no information
    return nmi_from_joint(joint, bins, static_cast<double>(total));
}

double nmi_patches(const RegionPatch& a, const RegionPatch& b, int bins) {
    return nmi_masked(a.image, a.mask, b.image, b.mask, bins);
}

double point_set_distance(std::span<const Point> a, std::span<const Point> b) {
    if (a.size() != b.size()) {
        throw CorrespondenceError("point_set_distance: lengths differ (" +
                                  std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                                  ")");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += norm2(a[i] - b[i]);
    return acc;
}

}  // namespace sketchcbr
