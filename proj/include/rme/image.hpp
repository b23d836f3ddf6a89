#pragma once

#include <vector>

namespace rme {

// H x W x 3 scalars in [0,1], row-major.
struct Image {
    int h = 0, w = 0;
    std::vector<float> data;

    Image() = default;
    Image(int h_, int w_) : h(h_), w(w_) {
        data.assign(static_cast<std::size_t>(h) * w * 3, 0.0f);
    }

    float* pixel(int y, int x) { return data.data() + (static_cast<std::size_t>(y) * w + x) * 3; }
    const float* pixel(int y, int x) const {
        return data.data() + (static_cast<std::size_t>(y) * w + x) * 3;
    }
};

// H x W projected depth in world units (distance along the camera forward
// axis, occupancy-weighted).
struct DepthMap {
    int h = 0, w = 0;
    std::vector<float> data;

    DepthMap() = default;
    DepthMap(int h_, int w_) : h(h_), w(w_) {
        data.assign(static_cast<std::size_t>(h) * w, 0.0f);
    }

    float& at(int y, int x) { return data[static_cast<std::size_t>(y) * w + x]; }
    float at(int y, int x) const { return data[static_cast<std::size_t>(y) * w + x]; }
};

} // namespace rme
