#include "sgwot/svg.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <stdexcept>

namespace sgwot {

namespace {

constexpr double kWidth = 900.0;
constexpr double kHeight = 520.0;
constexpr double kPad = 40.0;

struct Projection {
    double sx, sy, ox, oy;

    std::pair<double, double> operator()(double x, double y) const {
        return {ox + sx * x, oy - sy * y};
    }
};

Projection fit(double min_x, double max_x, double min_y, double max_y, double x0, double x1,
               double y0, double y1) {
    const double ex = std::max(max_x - min_x, 1e-12);
    const double ey = std::max(max_y - min_y, 1e-12);
    const double s = std::min((x1 - x0) / ex, (y1 - y0) / ey);
    return {s, s, x0 - s * min_x, y1 + s * min_y};
}

std::pair<double, double> xy(const PointCloud& pc, Index i) {
    const double x = pc.coords(i, 0);
    const double y = pc.dim() > 1 ? pc.coords(i, 1) : 0.0;
    return {x, y};
}

}  // namespace

void write_matching_svg(const std::string& path, const PointCloud& source,
                        const PointCloud& target, const Matrix& coupling, double threshold) {
    if (coupling.rows() != source.size() || coupling.cols() != target.size()) {
        throw std::invalid_argument("coupling dimensions do not match the point clouds");
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);

    auto bounds = [](const PointCloud& pc) {
        double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
        for (Index i = 0; i < pc.size(); ++i) {
            const auto [x, y] = xy(pc, i);
            if (i == 0) {
                min_x = max_x = x;
                min_y = max_y = y;
            } else {
                min_x = std::min(min_x, x);
                max_x = std::max(max_x, x);
                min_y = std::min(min_y, y);
                max_y = std::max(max_y, y);
            }
        }
        return std::array<double, 4>{min_x, max_x, min_y, max_y};
    };
    const auto bs = bounds(source);
    const auto bt = bounds(target);
    const double half = kWidth / 2.0;
    const Projection ps = fit(bs[0], bs[1], bs[2], bs[3], kPad, half - kPad, kPad, kHeight - kPad);
    const Projection pt = fit(bt[0], bt[1], bt[2], bt[3], half + kPad, kWidth - kPad, kPad,
                              kHeight - kPad);

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\">\n";
    const double pmax = coupling.size() > 0 ? coupling.maxCoeff() : 0.0;
    if (pmax > 0.0) {
        const double cut = threshold * pmax;
        for (Index i = 0; i < coupling.rows(); ++i) {
            for (Index j = 0; j < coupling.cols(); ++j) {
                if (coupling(i, j) < cut || coupling(i, j) <= 0.0) continue;
                const auto [xs, ys] = xy(source, i);
                const auto [xt, yt] = xy(target, j);
                const auto [ax, ay] = ps(xs, ys);
                const auto [bx, by] = pt(xt, yt);
                const double op = 0.15 + 0.85 * coupling(i, j) / pmax;
                out << "<line x1=\"" << ax << "\" y1=\"" << ay << "\" x2=\"" << bx << "\" y2=\""
                    << by << "\" stroke=\"#7a7a7a\" stroke-opacity=\"" << op
                    << "\" stroke-width=\"0.8\"/>\n";
            }
        }
    }
    for (Index i = 0; i < source.size(); ++i) {
        const auto [x, y] = xy(source, i);
        const auto [cx, cy] = ps(x, y);
        out << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
    }
    for (Index j = 0; j < target.size(); ++j) {
        const auto [x, y] = xy(target, j);
        const auto [cx, cy] = pt(x, y);
        out << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"3\" fill=\"#d62728\"/>\n";
    }
    out << "</svg>\n";
}

void write_cover_scatter_svg(const std::string& path,
                             const std::vector<std::pair<std::size_t, double>>& size_mass) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    double min_s = 0, max_s = 1, min_m = 0, max_m = 1;
    if (!size_mass.empty()) {
        min_s = max_s = static_cast<double>(size_mass.front().first);
        min_m = max_m = size_mass.front().second;
        for (const auto& [s, m] : size_mass) {
            min_s = std::min(min_s, static_cast<double>(s));
            max_s = std::max(max_s, static_cast<double>(s));
            min_m = std::min(min_m, m);
            max_m = std::max(max_m, m);
        }
    }
    const Projection pr = fit(min_s, max_s, min_m, max_m, kPad * 2, kWidth - kPad, kPad,
                              kHeight - kPad * 2);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\">\n";
    out << "<line x1=\"" << kPad * 2 << "\" y1=\"" << kHeight - kPad * 2 << "\" x2=\""
        << kWidth - kPad << "\" y2=\"" << kHeight - kPad * 2 << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << kPad * 2 << "\" y1=\"" << kPad << "\" x2=\"" << kPad * 2 << "\" y2=\""
        << kHeight - kPad * 2 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - kPad << "\" font-size=\"14\""
        << " text-anchor=\"middle\">cover size</text>\n";
    out << "<text x=\"" << kPad << "\" y=\"" << kHeight / 2 << "\" font-size=\"14\""
        << " text-anchor=\"middle\" transform=\"rotate(-90 " << kPad << " " << kHeight / 2
        << ")\">transported mass</text>\n";
    for (const auto& [s, m] : size_mass) {
        const auto [cx, cy] = pr(static_cast<double>(s), m);
        out << "<circle cx=\"" << cx << "\" cy=\"" << cy
            << "\" r=\"3\" fill=\"#1f77b4\" fill-opacity=\"0.7\"/>\n";
    }
    out << "</svg>\n";
}

}  // namespace sgwot
