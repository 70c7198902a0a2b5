#pragma once

// Static SVG scatter plot of a 2D company map.

#include <algorithm>
#include <limits>
#include <ostream>
#include <set>
#include <string>
#include <string_view>

#include "ledger_emd/text_io.hpp"
#include "ledger_emd/tsne.hpp"

namespace ledger_emd {

namespace detail {

inline std::string xml_escape(std::string_view s) {
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

}  // namespace detail

struct SvgOptions {
  std::set<std::string> highlighted;  ///< drawn as diamonds
  std::set<std::string> circled;      ///< get a ring around their marker
  double size = 800.0;
  double margin = 20.0;
};

inline void write_svg_scatter(std::ostream& out, const Embedding2D& emb, const SvgOptions& options = {}) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  double min_x = inf, min_y = inf, max_x = -inf, max_y = -inf;
  for (const auto& c : emb.coords) {
    min_x = std::min(min_x, c[0]);
    max_x = std::max(max_x, c[0]);
    min_y = std::min(min_y, c[1]);
    max_y = std::max(max_y, c[1]);
  }
  const double span = std::max({max_x - min_x, max_y - min_y, 1e-12});
  const double inner = options.size - 2.0 * options.margin;
  const auto fmt = [](double v) { return text::format_double(v, 6); };
  const auto px = [&](double x) { return fmt(options.margin + (x - min_x) / span * inner); };
  // SVG y grows downwards.
  const auto py = [&](double y) { return fmt(options.size - options.margin - (y - min_y) / span * inner); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(options.size) << "\" height=\""
      << fmt(options.size) << "\" viewBox=\"0 0 " << fmt(options.size) << ' ' << fmt(options.size) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  const auto pass = [&](bool highlighted_pass) {
    for (std::size_t i = 0; i < emb.company_ids.size(); ++i) {
      if (options.highlighted.count(emb.company_ids[i]) != (highlighted_pass ? 1u : 0u)) continue;
      const std::string x = px(emb.coords[i][0]);
      const std::string y = py(emb.coords[i][1]);
      out << "<g><title>" << detail::xml_escape(emb.company_ids[i]) << "</title>";
      if (highlighted_pass) {
        out << "<path d=\"M0,-6L6,0L0,6L-6,0Z\" transform=\"translate(" << x << ',' << y
            << ")\" fill=\"#e75480\"/>";
      } else {
        out << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"3\" fill=\"#3a9d5d\" fill-opacity=\"0.7\"/>";
      }
      if (options.circled.count(emb.company_ids[i])) {
        out << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"9\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>";
      }
      out << "</g>\n";
    }
  };
  pass(false);
  pass(true);  // highlighted markers on top
  out << "</svg>\n";
}

}  // namespace ledger_emd
