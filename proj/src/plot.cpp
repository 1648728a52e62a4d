#include "retro/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace retro {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kMargin = 48.0;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_plot(const DiscreteMeasure& mu_f, const DiscreteMeasure& mu_r, const std::string& title) {
    if (mu_f.empty() && mu_r.empty()) throw Error(ErrorCode::InvalidArgument, "nothing to plot: both measures are empty");

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double top = 0.0;
    for (const auto* mu : {&mu_f, &mu_r}) {
        for (const Atom& a : mu->atoms()) {
            lo = std::min(lo, a.value);
            hi = std::max(hi, a.value);
            top = std::max(top, a.weight);
        }
    }
    if (hi - lo < 1e-12) {
        lo -= 1.0;
        hi += 1.0;
    } else {
        const double pad = 0.08 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
    if (top <= 0.0) top = 1.0;

    const double axis_y = kHeight / 2.0;
    const double half = axis_y - kMargin;
    auto sx = [&](double v) { return kMargin + (v - lo) / (hi - lo) * (kWidth - 2.0 * kMargin); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\"" << num(kHeight)
       << "\" viewBox=\"0 0 " << num(kWidth) << " " << num(kHeight) << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty()) {
        os << "<text x=\"" << num(kWidth / 2) << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           << "font-size=\"14\">" << escape(title) << "</text>\n";
    }
    os << "<line class=\"axis\" x1=\"" << num(kMargin) << "\" y1=\"" << num(axis_y) << "\" x2=\""
       << num(kWidth - kMargin) << "\" y2=\"" << num(axis_y) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(kMargin) << "\" y=\"" << num(kHeight - 12) << "\" font-family=\"sans-serif\" "
       << "font-size=\"11\">" << num(lo) << "</text>\n";
    os << "<text x=\"" << num(kWidth - kMargin) << "\" y=\"" << num(kHeight - 12)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(hi) << "</text>\n";
    os << "<text x=\"8\" y=\"" << num(kMargin) << "\" font-family=\"sans-serif\" font-size=\"11\" "
       << "fill=\"#1f4e9a\">forward</text>\n";
    os << "<text x=\"8\" y=\"" << num(kHeight - kMargin) << "\" font-family=\"sans-serif\" font-size=\"11\" "
       << "fill=\"#a8321f\">reverse</text>\n";

    auto stems = [&](const DiscreteMeasure& mu, const char* cls, const char* colour, double sign) {
        for (const Atom& a : mu.atoms()) {
            const double x = sx(a.value);
            const double y = axis_y - sign * half * a.weight / top;
            os << "<line class=\"stem " << cls << "\" x1=\"" << num(x) << "\" y1=\"" << num(axis_y) << "\" x2=\""
               << num(x) << "\" y2=\"" << num(y) << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
            os << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"3\" fill=\"" << colour
               << "\"><title>omega=" << num(a.value) << " weight=" << num(a.weight) << "</title></circle>\n";
        }
    };
    stems(mu_f, "forward", "#1f4e9a", 1.0);
    stems(mu_r, "reverse", "#a8321f", -1.0);
    os << "</svg>\n";
    return os.str();
}

void emit_plot(const DiscreteMeasure& mu_f, const DiscreteMeasure& mu_r, const std::filesystem::path& path,
               const std::string& title) {
    const std::string svg = render_plot(mu_f, mu_r, title);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << svg;
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace retro
