// Copyright 2026 The StepAlign Authors.
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

#include "stepalign/pipeline/timeline_svg.h"

#include <algorithm>
#include <cstdio>
#include <string>

namespace stepalign {

namespace {

constexpr double kWidth = 960.0;
constexpr double kLabelWidth = 90.0;
constexpr double kRowHeight = 28.0;
constexpr double kRowGap = 12.0;
constexpr double kTop = 30.0;

std::string step_colour(int step) {
  // Golden-angle hue steps keep neighbouring steps apart.
  char buf[32];
  std::snprintf(buf, sizeof(buf), "hsl(%d,60%%,60%%)", (step * 137) % 360);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

class Canvas {
 public:
  explicit Canvas(int num_frames) : scale_((kWidth - kLabelWidth - 10.0) / std::max(1, num_frames)) {}

  void row_label(int row, const std::string& text) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"4\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"12\">%s</text>\n",
                  y(row) + kRowHeight * 0.65, text.c_str());
    body_ += buf;
  }

  void rect(int row, Segment seg, const std::string& fill, bool hatched, const std::string& title) {
    const double x = kLabelWidth + seg.start * scale_;
    const double w = std::max(1.0, seg.length() * scale_);
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"%.2f\" y=\"%.1f\" width=\"%.2f\" height=\"%.1f\" fill=\"%s\" "
                  "stroke=\"#333\" stroke-width=\"0.5\"><title>%s</title></rect>\n",
                  x, y(row), w, kRowHeight, fill.c_str(), escape(title).c_str());
    body_ += buf;
    if (hatched) {
      std::snprintf(buf, sizeof(buf),
                    "<rect x=\"%.2f\" y=\"%.1f\" width=\"%.2f\" height=\"%.1f\" "
                    "fill=\"url(#hatch)\"/>\n",
                    x, y(row), w, kRowHeight);
      body_ += buf;
    }
  }

  std::string finish(const std::string& title) const {
    const double height = kTop + 2 * kRowHeight + kRowGap + 12.0;
    char head[512];
    std::snprintf(head, sizeof(head),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                  "viewBox=\"0 0 %.0f %.0f\">\n"
                  "<defs><pattern id=\"hatch\" width=\"6\" height=\"6\" "
                  "patternUnits=\"userSpaceOnUse\" patternTransform=\"rotate(45)\">"
                  "<line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"6\" stroke=\"#000\" stroke-width=\"2\"/>"
                  "</pattern></defs>\n"
                  "<rect width=\"100%%\" height=\"100%%\" fill=\"#fff\"/>\n",
                  kWidth, height, kWidth, height);
    return std::string(head) +
           "<text x=\"4\" y=\"18\" font-family=\"sans-serif\" font-size=\"14\">" +
           escape(title) + "</text>\n" + body_ + "</svg>\n";
  }

 private:
  static double y(int row) { return kTop + row * (kRowHeight + kRowGap); }

  double scale_;
  std::string body_;
};

}  // namespace

std::string timeline_svg(const VideoPrediction& video) {
  Canvas c(video.num_frames);
  c.row_label(0, "ground truth");
  c.row_label(1, "predicted");
  for (const auto& s : video.ground_truth) {
    const bool defined = s.step.is_defined();
    const std::string step = defined ? "step " + std::to_string(s.step.index()) : "undefined";
    c.rect(0, s.segment, defined ? step_colour(s.step.index()) : "#bbb", !s.mistake.is_correct(),
           step + ": " + std::string(mistake_code(s.mistake)));
  }
  for (const auto& d : video.detections) {
    char conf[32];
    std::snprintf(conf, sizeof(conf), "%.3f", d.confidence);
    c.rect(1, d.segment, step_colour(d.step), d.label != CoarseLabel::kCorrect,
           "step " + std::to_string(d.step) + ": " + std::string(coarse_name(d.label)) + " (" +
               conf + ")");
  }
  return c.finish(video.video_id + " (fold " + std::to_string(video.fold_id) + ")");
}

}  // namespace stepalign
