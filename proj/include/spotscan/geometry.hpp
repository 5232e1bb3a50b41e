#pragma once

#include <algorithm>
#include <compare>

namespace spotscan {

// Axis-aligned pixel rectangle, half-open: [x0, x1) x [y0, y1).
struct Rect {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
    long long area() const { return static_cast<long long>(width()) * height(); }
    bool empty() const { return x1 <= x0 || y1 <= y0; }

    bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }

    Rect intersect(const Rect& o) const {
        Rect r{std::max(x0, o.x0), std::max(y0, o.y0), std::min(x1, o.x1), std::min(y1, o.y1)};
        if (r.empty()) return Rect{};
        return r;
    }

    Rect unite(const Rect& o) const {
        if (empty()) return o;
        if (o.empty()) return *this;
        return Rect{std::min(x0, o.x0), std::min(y0, o.y0), std::max(x1, o.x1), std::max(y1, o.y1)};
    }

    // True when the rectangles overlap or touch along an edge or corner.
    bool touches(const Rect& o) const {
        if (empty() || o.empty()) return false;
        return x0 <= o.x1 && o.x0 <= x1 && y0 <= o.y1 && o.y0 <= y1;
    }

    bool operator==(const Rect&) const = default;
    auto operator<=>(const Rect&) const = default;
};

}  // namespace spotscan
