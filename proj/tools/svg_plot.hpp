#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "mdf/errors.hpp"

namespace mdf {

// Residual-curve plot as a bare SVG: axes, log10 y scale, one polyline.
inline void write_residual_svg(const std::vector<double>& residuals,
                               const std::string& path, const std::string& title) {
    if (residuals.empty()) throw std::invalid_argument("no residuals to plot");

    constexpr double width = 640.0, height = 420.0;
    constexpr double ml = 70.0, mr = 20.0, mt = 40.0, mb = 50.0;
    const double pw = width - ml - mr;
    const double ph = height - mt - mb;

    double lo = 0.0, hi = -300.0;
    for (double r : residuals) {
        const double lg = std::log10(std::max(r, 1e-300));
        lo = std::min(lo, lg);
        hi = std::max(hi, lg);
    }
    lo = std::floor(lo) - (lo == hi ? 1.0 : 0.0);
    hi = std::ceil(hi);

    const auto n = residuals.size();
    const auto sx = [&](double k) { return ml + (n > 1 ? (k - 1) / (double(n) - 1) : 0.5) * pw; };
    const auto sy = [&](double lg) { return mt + (hi - lg) / (hi - lo) * ph; };

    char buf[160];
    std::string body;
    body += "<path fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" d=\"";
    for (std::size_t i = 0; i < n; ++i) {
        const double lg = std::log10(std::max(residuals[i], 1e-300));
        std::snprintf(buf, sizeof(buf), "%c%.2f %.2f ", i == 0 ? 'M' : 'L',
                      sx(double(i) + 1.0), sy(lg));
        body += buf;
    }
    body += "\"/>\n";

    // y grid at integer decades
    for (int d = static_cast<int>(lo); d <= static_cast<int>(hi); ++d) {
        const double yy = sy(d);
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.1f\" y1=\"%.2f\" x2=\"%.1f\" y2=\"%.2f\" "
                      "stroke=\"#dddddd\"/>\n",
                      ml, yy, width - mr, yy);
        body += buf;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%.1f\" y=\"%.2f\" font-size=\"11\" text-anchor=\"end\" "
                      "fill=\"#444444\">1e%d</text>\n",
                      ml - 6.0, yy + 4.0, d);
        body += buf;
    }

    std::ofstream out(path);
    if (!out) throw io_error("cannot open " + path + " for writing");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << width / 2 << "\" y=\"22\" font-size=\"14\" text-anchor=\"middle\">"
        << title << "</text>\n"
        << body;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                  ml, mt, ml, height - mb);
    out << buf;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                  ml, height - mb, width - mr, height - mb);
    out << buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" text-anchor=\"middle\">"
                  "iteration k</text>\n",
                  ml + pw / 2, height - 14.0);
    out << buf
        << "<text x=\"16\" y=\"" << mt + ph / 2
        << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << mt + ph / 2
        << ")\">normalized residual</text>\n"
        << "</svg>\n";
    if (!out) throw io_error("write failure on " + path);
}

}  // namespace mdf
