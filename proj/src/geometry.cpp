#include "morphiris/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "morphiris/errors.hpp"

namespace morphiris {

std::string IrisGeometry::violation() const {
    for (const auto* e : {&pupil, &iris}) {
        if (!std::isfinite(e->cx) || !std::isfinite(e->cy) || !std::isfinite(e->r_min) ||
            !std::isfinite(e->r_max))
            return "non-finite parameter";
        if (!(e->r_min > 0.0) || e->r_min > e->r_max) return "radii must satisfy 0 < r_min <= r_max";
    }
    if (!(pupil.r_max < iris.r_min)) return "pupil radius not below iris radius";
    const double d = std::hypot(pupil.cx - iris.cx, pupil.cy - iris.cy);
    if (!(d < iris.r_min - pupil.r_max)) return "pupil not strictly inside iris";
    return {};
}

void IrisGeometry::validate() const {
    if (auto v = violation(); !v.empty()) throw GeometryError("invalid geometry (" + v + "): " + to_string(*this), *this);
}

std::string to_string(const EllipseParams& e) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "[%.3f, %.3f, %.3f, %.3f]", e.cx, e.cy, e.r_min, e.r_max);
    return buf;
}

std::string to_string(const IrisGeometry& g) {
    return "pupil " + to_string(g.pupil) + " iris " + to_string(g.iris);
}

std::string format_geometry(const IrisGeometry& g) {
    char buf[256];
    std::string out;
    for (const auto& [name, e] : {std::pair{"pupil", g.pupil}, std::pair{"iris", g.iris}}) {
        std::snprintf(buf, sizeof buf, "%s %.17g %.17g %.17g %.17g\n", name, e.cx, e.cy, e.r_min, e.r_max);
        out += buf;
    }
    return out;
}

IrisGeometry parse_geometry(const std::string& text) {
    std::istringstream in(text);
    IrisGeometry g;
    bool seen_pupil = false, seen_iris = false;
    std::string name;
    while (in >> name) {
        EllipseParams e;
        if (!(in >> e.cx >> e.cy >> e.r_min >> e.r_max)) throw FormatError("geometry: malformed '" + name + "' line");
        if (name == "pupil") {
            g.pupil = e;
            seen_pupil = true;
        } else if (name == "iris") {
            g.iris = e;
            seen_iris = true;
        } else {
            throw FormatError("geometry: unknown record '" + name + "'");
        }
    }
    if (!seen_pupil || !seen_iris) throw FormatError("geometry: missing pupil or iris record");
    return g;
}

}  // namespace morphiris
