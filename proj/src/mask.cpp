#include <algorithm>
#include <cmath>
#include <string>

#include "poselift/error.hpp"
#include "poselift/ingest.hpp"

namespace poselift {

void validate(const Mask2D& mask) {
    if (mask.width <= 0 || mask.height <= 0)
        throw ValidationError("Mask2D: width and height must be positive");
    const std::int64_t total = std::int64_t{mask.width} * mask.height;
    std::int64_t end = 0;
    for (std::size_t i = 0; i < mask.runs.size(); ++i) {
        const auto& run = mask.runs[i];
        const std::string where = "Mask2D.runs[" + std::to_string(i) + "]";
        if (run.length <= 0) throw ValidationError(where + ": length must be positive");
        if (run.start < 0 || run.start + run.length > total)
            throw ValidationError(where + ": outside the frame");
        if (run.start < end) {
            // A run starting before its predecessor ended is either unsorted or overlapping.
            if (i > 0 && run.start < mask.runs[i - 1].start)
                throw ValidationError(where + ": runs not sorted by start index");
            throw ValidationError(where + ": overlaps the previous run");
        }
        end = run.start + run.length;
    }
}

std::vector<std::int64_t> decode_mask(const Mask2D& mask) {
    validate(mask);
    std::vector<std::int64_t> out;
    out.reserve(static_cast<std::size_t>(pixel_count(mask)));
    for (const auto& run : mask.runs)
        for (std::int64_t k = 0; k < run.length; ++k) out.push_back(run.start + k);
    return out;
}

Mask2D encode_mask(int width, int height, std::span<const std::int64_t> indices) {
    Mask2D mask{width, height, {}};
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const auto idx = indices[i];
        if (i > 0 && idx <= indices[i - 1])
            throw ValidationError("encode_mask: indices must be strictly ascending");
        if (!mask.runs.empty() && mask.runs.back().start + mask.runs.back().length == idx)
            ++mask.runs.back().length;
        else
            mask.runs.push_back({idx, 1});
    }
    validate(mask);
    return mask;
}

std::vector<std::uint8_t> rasterize(const Mask2D& mask) {
    validate(mask);
    std::vector<std::uint8_t> dense(static_cast<std::size_t>(mask.width) * mask.height, 0);
    for (const auto& run : mask.runs)
        std::fill_n(dense.begin() + run.start, run.length, std::uint8_t{1});
    return dense;
}

std::int64_t pixel_count(const Mask2D& mask) {
    std::int64_t n = 0;
    for (const auto& run : mask.runs) n += run.length;
    return n;
}

}  // namespace poselift
