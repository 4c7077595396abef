#include "prefixgan/plot.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace prefixgan {

namespace {

// 5x7 glyphs, one byte per row, bit 4 = leftmost pixel. Lowercase letters,
// digits and the few symbols axis labels need.
struct Glyph {
  char ch;
  unsigned char rows[7];
};

constexpr Glyph kFont[] = {
    {' ', {0, 0, 0, 0, 0, 0, 0}},
    {'.', {0, 0, 0, 0, 0, 0x0C, 0x0C}},
    {',', {0, 0, 0, 0, 0, 0x0C, 0x08}},
    {'-', {0, 0, 0, 0x1F, 0, 0, 0}},
    {'+', {0, 0x04, 0x04, 0x1F, 0x04, 0x04, 0}},
    {'_', {0, 0, 0, 0, 0, 0, 0x1F}},
    {':', {0, 0x0C, 0x0C, 0, 0x0C, 0x0C, 0}},
    {'(', {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02}},
    {')', {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08}},
    {'/', {0x01, 0x01, 0x02, 0x04, 0x08, 0x10, 0x10}},
    {'=', {0, 0, 0x1F, 0, 0x1F, 0, 0}},
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
    {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
    {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
    {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
    {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
    {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {'a', {0, 0, 0x0E, 0x01, 0x0F, 0x11, 0x0F}},
    {'b', {0x10, 0x10, 0x1E, 0x11, 0x11, 0x11, 0x1E}},
    {'c', {0, 0, 0x0E, 0x11, 0x10, 0x11, 0x0E}},
    {'d', {0x01, 0x01, 0x0F, 0x11, 0x11, 0x11, 0x0F}},
    {'e', {0, 0, 0x0E, 0x11, 0x1F, 0x10, 0x0E}},
    {'f', {0x06, 0x09, 0x08, 0x1C, 0x08, 0x08, 0x08}},
    {'g', {0, 0, 0x0F, 0x11, 0x0F, 0x01, 0x0E}},
    {'h', {0x10, 0x10, 0x1E, 0x11, 0x11, 0x11, 0x11}},
    {'i', {0x04, 0, 0x0C, 0x04, 0x04, 0x04, 0x0E}},
    {'j', {0x02, 0, 0x06, 0x02, 0x02, 0x12, 0x0C}},
    {'k', {0x10, 0x10, 0x12, 0x14, 0x18, 0x14, 0x12}},
    {'l', {0x0C, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'m', {0, 0, 0x1A, 0x15, 0x15, 0x15, 0x15}},
    {'n', {0, 0, 0x1E, 0x11, 0x11, 0x11, 0x11}},
    {'o', {0, 0, 0x0E, 0x11, 0x11, 0x11, 0x0E}},
    {'p', {0, 0, 0x1E, 0x11, 0x1E, 0x10, 0x10}},
    {'q', {0, 0, 0x0F, 0x11, 0x0F, 0x01, 0x01}},
    {'r', {0, 0, 0x16, 0x19, 0x10, 0x10, 0x10}},
    {'s', {0, 0, 0x0F, 0x10, 0x0E, 0x01, 0x1E}},
    {'t', {0x08, 0x08, 0x1C, 0x08, 0x08, 0x09, 0x06}},
    {'u', {0, 0, 0x11, 0x11, 0x11, 0x13, 0x0D}},
    {'v', {0, 0, 0x11, 0x11, 0x11, 0x0A, 0x04}},
    {'w', {0, 0, 0x15, 0x15, 0x15, 0x15, 0x0A}},
    {'x', {0, 0, 0x11, 0x0A, 0x04, 0x0A, 0x11}},
    {'y', {0, 0, 0x11, 0x11, 0x0F, 0x01, 0x0E}},
    {'z', {0, 0, 0x1F, 0x02, 0x04, 0x08, 0x1F}},
};

const Glyph* find_glyph(char c) {
  if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  for (const auto& g : kFont)
    if (g.ch == c) return &g;
  return nullptr;
}

struct Canvas {
  int w, h;
  std::vector<unsigned char> rgb;

  Canvas(int width, int height) : w(width), h(height), rgb(3u * width * height, 255) {}

  void put(int x, int y, unsigned char r, unsigned char g, unsigned char b) {
    if (x < 0 || x >= w || y < 0 || y >= h) return;
    const std::size_t i = 3u * (static_cast<std::size_t>(y) * w + x);
    rgb[i] = r;
    rgb[i + 1] = g;
    rgb[i + 2] = b;
  }

  void line(int x0, int y0, int x1, int y1, unsigned char r, unsigned char g,
            unsigned char b) {
    const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
      put(x0, y0, r, g, b);
      if (x0 == x1 && y0 == y1) break;
      const int e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y0 += sy;
      }
    }
  }

  void text(int x, int y, const std::string& s, unsigned char r = 0, unsigned char g = 0,
            unsigned char b = 0) {
    int cx = x;
    for (char c : s) {
      if (const Glyph* gl = find_glyph(c)) {
        for (int row = 0; row < 7; ++row)
          for (int col = 0; col < 5; ++col)
            if (gl->rows[row] & (1 << (4 - col))) put(cx + col, y + row, r, g, b);
      }
      cx += 6;
    }
  }

  /// Text rotated 90 degrees counter-clockwise (reads bottom-to-top).
  void vtext(int x, int y, const std::string& s, unsigned char r = 0, unsigned char g = 0,
             unsigned char b = 0) {
    int cy = y;
    for (char c : s) {
      if (const Glyph* gl = find_glyph(c)) {
        for (int row = 0; row < 7; ++row)
          for (int col = 0; col < 5; ++col)
            if (gl->rows[row] & (1 << (4 - col))) put(x + row, cy - col, r, g, b);
      }
      cy -= 6;
    }
  }
};

void png_chunk(std::ofstream& os, const char* type, const unsigned char* data,
               std::size_t len) {
  auto be32 = [&os](std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v)};
    os.write(reinterpret_cast<const char*>(b), 4);
  };
  be32(static_cast<std::uint32_t>(len));
  os.write(type, 4);
  if (len) os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(len));
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(type), 4);
  if (len) crc = crc32(crc, data, static_cast<uInt>(len));
  be32(static_cast<std::uint32_t>(crc));
}

void write_png(const std::filesystem::path& file, const Canvas& c) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("write_png: cannot open " + file.string());
  static const unsigned char sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
  os.write(reinterpret_cast<const char*>(sig), 8);

  unsigned char ihdr[13];
  auto put_be = [&ihdr](int off, std::uint32_t v) {
    ihdr[off] = static_cast<unsigned char>(v >> 24);
    ihdr[off + 1] = static_cast<unsigned char>(v >> 16);
    ihdr[off + 2] = static_cast<unsigned char>(v >> 8);
    ihdr[off + 3] = static_cast<unsigned char>(v);
  };
  put_be(0, static_cast<std::uint32_t>(c.w));
  put_be(4, static_cast<std::uint32_t>(c.h));
  ihdr[8] = 8;   // bit depth
  ihdr[9] = 2;   // truecolor
  ihdr[10] = ihdr[11] = ihdr[12] = 0;
  png_chunk(os, "IHDR", ihdr, 13);

  std::vector<unsigned char> raw;
  raw.reserve((3u * c.w + 1) * c.h);
  for (int y = 0; y < c.h; ++y) {
    raw.push_back(0);  // filter: none
    const unsigned char* row = &c.rgb[3u * static_cast<std::size_t>(y) * c.w];
    raw.insert(raw.end(), row, row + 3u * c.w);
  }
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<unsigned char> compressed(bound);
  if (compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 9) !=
      Z_OK)
    throw std::runtime_error("write_png: deflate failed");
  png_chunk(os, "IDAT", compressed.data(), bound);
  png_chunk(os, "IEND", nullptr, 0);
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

void write_curves_png(const std::filesystem::path& file, const std::string& x_label,
                      const std::string& y_label, const std::vector<PlotSeries>& series,
                      int width, int height) {
  if (series.empty()) throw std::invalid_argument("write_curves_png: no series");
  Canvas canvas(width, height);
  const int ml = 64, mr = 16, mt = 16, mb = 44;
  const int x0 = ml, x1 = width - mr, y0 = height - mb, y1 = mt;

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  std::size_t max_len = 0;
  for (const auto& s : series) {
    max_len = std::max(max_len, s.y.size());
    for (double v : s.y)
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  }
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-12) {
    hi += 0.5;
    lo -= 0.5;
  }
  const double x_max = max_len > 1 ? static_cast<double>(max_len - 1) : 1.0;

  auto px = [&](double x) {
    return x0 + static_cast<int>(std::lround((x / x_max) * (x1 - x0)));
  };
  auto py = [&](double y) {
    return y0 - static_cast<int>(std::lround(((y - lo) / (hi - lo)) * (y0 - y1)));
  };

  // Axes, ticks, labels.
  canvas.line(x0, y0, x1, y0, 0, 0, 0);
  canvas.line(x0, y0, x0, y1, 0, 0, 0);
  const int n_ticks = 5;
  for (int i = 0; i <= n_ticks; ++i) {
    const double fx = x_max * i / n_ticks;
    const int tx = px(fx);
    canvas.line(tx, y0, tx, y0 + 4, 0, 0, 0);
    const std::string lbl = tick_label(fx);
    canvas.text(tx - static_cast<int>(lbl.size()) * 3, y0 + 7, lbl);
    const double fy = lo + (hi - lo) * i / n_ticks;
    const int ty = py(fy);
    canvas.line(x0 - 4, ty, x0, ty, 0, 0, 0);
    const std::string ylbl = tick_label(fy);
    canvas.text(x0 - 6 - static_cast<int>(ylbl.size()) * 6, ty - 3, ylbl);
  }
  canvas.text((x0 + x1) / 2 - static_cast<int>(x_label.size()) * 3, height - 12, x_label);
  canvas.vtext(6, (y0 + y1) / 2 + static_cast<int>(y_label.size()) * 3, y_label);

  static const unsigned char palette[][3] = {
      {214, 39, 40},  {31, 119, 180}, {44, 160, 44},  {255, 127, 14},
      {148, 103, 189}, {140, 86, 75},  {23, 190, 207}, {127, 127, 127},
  };
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& col = palette[si % (sizeof(palette) / sizeof(palette[0]))];
    const auto& y = series[si].y;
    for (std::size_t i = 0; i + 1 < y.size(); ++i) {
      if (!std::isfinite(y[i]) || !std::isfinite(y[i + 1])) continue;
      canvas.line(px(static_cast<double>(i)), py(y[i]), px(static_cast<double>(i + 1)),
                  py(y[i + 1]), col[0], col[1], col[2]);
    }
    // Legend entry.
    const int ly = y1 + 4 + static_cast<int>(si) * 10;
    canvas.line(x1 - 90, ly + 3, x1 - 78, ly + 3, col[0], col[1], col[2]);
    canvas.text(x1 - 74, ly, series[si].label, 0, 0, 0);
  }
  write_png(file, canvas);
}

}  // namespace prefixgan
