// Copyright 2026 The evgrid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <string>

#include "evgrid/eval.hpp"

namespace evgrid
{
namespace
{

constexpr double kWidth = 480.0;
constexpr double kHeight = 480.0;
constexpr double kMargin = 56.0;

double px(double recall) { return kMargin + recall * (kWidth - 2.0 * kMargin); }
double py(double precision) { return kHeight - kMargin - precision * (kHeight - 2.0 * kMargin); }

template <typename... Args>
void append(std::string & out, const char * fmt, Args... args)
{
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  out += buf;
}

}  // namespace

std::string render_pr_svg(const PrCurve & curve, const std::optional<ClassicPoint> & classic)
{
  std::string out;
  append(
    out,
    "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
    kWidth, kHeight, kWidth, kHeight);
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int k = 0; k <= 10; ++k) {
    const double v = k / 10.0;
    append(
      out, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#dddddd\"/>\n", px(v), py(0.0),
      px(v), py(1.0));
    append(
      out, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#dddddd\"/>\n", px(0.0), py(v),
      px(1.0), py(v));
    append(
      out, "<text x=\"%.2f\" y=\"%.2f\" font-size=\"10\" text-anchor=\"middle\">%.1f</text>\n", px(v),
      py(0.0) + 14.0, v);
    append(
      out, "<text x=\"%.2f\" y=\"%.2f\" font-size=\"10\" text-anchor=\"end\">%.1f</text>\n",
      px(0.0) - 6.0, py(v) + 3.0, v);
  }
  append(
    out, "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"none\" stroke=\"black\"/>\n",
    px(0.0), py(1.0), px(1.0) - px(0.0), py(0.0) - py(1.0));
  append(
    out, "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" text-anchor=\"middle\">Recall</text>\n",
    kWidth / 2.0, kHeight - 16.0);
  append(
    out,
    "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" text-anchor=\"middle\" "
    "transform=\"rotate(-90 %.2f %.2f)\">Precision</text>\n",
    18.0, kHeight / 2.0, 18.0, kHeight / 2.0);

  if (!curve.points.empty()) {
    out += "<polyline fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"2\" points=\"";
    for (const auto & p : curve.points) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(p.recall), py(p.precision));
      out += buf;
    }
    out += "\"/>\n";
  }
  if (classic) {
    append(
      out, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"5\" fill=\"red\"/>\n", px(classic->recall),
      py(classic->precision));
  }
  append(
    out, "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\">AP = %.4f</text>\n", px(0.0) + 8.0,
    py(0.0) - 8.0, curve.ap);
  out += "</svg>\n";
  return out;
}

}  // namespace evgrid
