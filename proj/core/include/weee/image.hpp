#pragma once

#include <cstdint>
#include <vector>

namespace weee {

template <typename T>
struct Image {
    int rows = 0;
    int cols = 0;
    std::vector<T> px;

    Image() = default;
    Image(int r, int c, T fill = T{}) : rows(r), cols(c), px(static_cast<size_t>(r) * c, fill) {}

    T& at(int r, int c) { return px[static_cast<size_t>(r) * cols + c]; }
    const T& at(int r, int c) const { return px[static_cast<size_t>(r) * cols + c]; }
    T* row(int r) { return px.data() + static_cast<size_t>(r) * cols; }
    const T* row(int r) const { return px.data() + static_cast<size_t>(r) * cols; }
    bool empty() const { return px.empty(); }

    friend bool operator==(const Image&, const Image&) = default;
};

using Image8 = Image<uint8_t>;
using Image16 = Image<uint16_t>;
using Image32 = Image<int32_t>;

}  // namespace weee
