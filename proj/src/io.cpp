#include "dcrf/io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <string>

namespace dcrf::io {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw InputError(path.string() + ": cannot open file");
  return f;
}

struct RawPng {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int color_type = 0;
  int bit_depth = 0;
  int channels = 0;
  std::vector<std::uint16_t> samples;
  std::vector<std::array<std::uint8_t, 3>> palette;
};

void png_error_to_buffer(png_structp png, png_const_charp msg) {
  auto* buf = static_cast<char*>(png_get_error_ptr(png));
  std::snprintf(buf, 256, "%s", msg);
  std::longjmp(png_jmpbuf(png), 1);
}

void png_warning_ignore(png_structp, png_const_charp) {}

// No C++ objects are created between setjmp and the libpng calls that may jump.
bool read_png(std::FILE* file, RawPng& out, char* err) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, err, png_error_to_buffer, png_warning_ignore);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> rows;
  std::vector<png_byte> data;
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    return false;
  }
  png_init_io(png, file);
  png_read_info(png, info);
  png_set_packing(png);
  png_read_update_info(png, info);
  out.width = png_get_image_width(png, info);
  out.height = png_get_image_height(png, info);
  out.color_type = png_get_color_type(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  out.channels = png_get_channels(png, info);
  if (out.color_type == PNG_COLOR_TYPE_PALETTE) {
    png_colorp pal = nullptr;
    int n = 0;
    png_get_PLTE(png, info, &pal, &n);
    out.palette.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.palette[i] = {pal[i].red, pal[i].green, pal[i].blue};
  }
  std::size_t rowbytes = png_get_rowbytes(png, info);
  data.resize(rowbytes * out.height);
  rows.resize(out.height);
  for (png_uint_32 y = 0; y < out.height; ++y) rows[y] = data.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t count = static_cast<std::size_t>(out.width) * out.height * out.channels;
  out.samples.resize(count);
  if (out.bit_depth == 16) {
    for (std::size_t i = 0; i < count; ++i) out.samples[i] = static_cast<std::uint16_t>(data[2 * i] << 8 | data[2 * i + 1]);
  } else {
    for (std::size_t i = 0; i < count; ++i) out.samples[i] = data[i];
  }
  return true;
}

RawPng load_raw_png(const std::filesystem::path& path) {
  FilePtr f = open_file(path, "rb");
  std::array<unsigned char, 8> sig{};
  if (std::fread(sig.data(), 1, 8, f.get()) != 8 || png_sig_cmp(sig.data(), 0, 8) != 0)
    throw InputError(path.string() + ": offset 0: not a PNG file");
  std::rewind(f.get());
  RawPng raw;
  char err[256] = "unknown libpng error";
  if (!read_png(f.get(), raw, err)) throw InputError(path.string() + ": " + err);
  return raw;
}

bool is_png(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path.string() + ": cannot open file");
  std::array<unsigned char, 8> sig{};
  in.read(reinterpret_cast<char*>(sig.data()), 8);
  return in.gcount() == 8 && png_sig_cmp(sig.data(), 0, 8) == 0;
}

bool write_png(std::FILE* file, png_uint_32 w, png_uint_32 h, int color_type, const std::uint8_t* data,
               std::size_t rowbytes, const std::vector<png_color>* palette, char* err) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, err, png_error_to_buffer, png_warning_ignore);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> rows(h);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, info ? &info : nullptr);
    return false;
  }
  png_init_io(png, file);
  png_set_IHDR(png, info, w, h, 8, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  if (palette) png_set_PLTE(png, info, palette->data(), static_cast<int>(palette->size()));
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = const_cast<png_bytep>(data + y * rowbytes);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

// Pascal VOC style colour map.
std::vector<png_color> label_palette() {
  std::vector<png_color> pal(256);
  for (int i = 0; i < 256; ++i) {
    int r = 0, g = 0, b = 0, c = i;
    for (int j = 0; j < 8; ++j) {
      r |= ((c >> 0) & 1) << (7 - j);
      g |= ((c >> 1) & 1) << (7 - j);
      b |= ((c >> 2) & 1) << (7 - j);
      c >>= 3;
    }
    pal[i] = {static_cast<png_byte>(r), static_cast<png_byte>(g), static_cast<png_byte>(b)};
  }
  return pal;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Rows of comma separated numbers; blank lines and lines starting with '#' are skipped.
template <class T>
std::vector<std::vector<T>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open file");
  std::vector<std::vector<T>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<T> row;
    std::size_t start = 0;
    int col = 1;
    while (true) {
      std::size_t comma = t.find(',', start);
      std::string field = trim(std::string_view(t).substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      T value{};
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
      if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
        throw InputError(path.string() + ": line " + std::to_string(lineno) + ", field " + std::to_string(col) +
                         ": malformed value '" + field + "'");
      row.push_back(value);
      if (comma == std::string::npos) break;
      start = comma + 1;
      ++col;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::uint32_t read_u32le(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

void write_u32le(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

constexpr char kUnaryMagic[4] = {'D', 'C', 'R', 'U'};

}  // namespace

RgbImage load_image(const std::filesystem::path& path) {
  RawPng raw = load_raw_png(path);
  RgbImage img;
  img.width = static_cast<int>(raw.width);
  img.height = static_cast<int>(raw.height);
  img.pixels.resize(static_cast<std::size_t>(3) * img.size());
  const int shift = raw.bit_depth == 16 ? 8 : 0;
  for (Index a = 0; a < img.size(); ++a) {
    const std::uint16_t* s = raw.samples.data() + a * raw.channels;
    std::uint8_t* d = img.pixels.data() + 3 * a;
    switch (raw.color_type) {
      case PNG_COLOR_TYPE_PALETTE: {
        if (s[0] >= raw.palette.size())
          throw InputError(path.string() + ": pixel " + std::to_string(a) + ": palette index out of range");
        auto c = raw.palette[s[0]];
        d[0] = c[0], d[1] = c[1], d[2] = c[2];
        break;
      }
      case PNG_COLOR_TYPE_GRAY:
      case PNG_COLOR_TYPE_GRAY_ALPHA:
        d[0] = d[1] = d[2] = static_cast<std::uint8_t>(s[0] >> shift);
        break;
      default:
        for (int c = 0; c < 3; ++c) d[c] = static_cast<std::uint8_t>(s[c] >> shift);
    }
  }
  return img;
}

void save_image(const std::filesystem::path& path, const RgbImage& image) {
  FilePtr f = open_file(path, "wb");
  char err[256] = "unknown libpng error";
  if (!write_png(f.get(), image.width, image.height, PNG_COLOR_TYPE_RGB, image.pixels.data(),
                 static_cast<std::size_t>(3) * image.width, nullptr, err))
    throw InputError(path.string() + ": " + err);
}

Matrix load_unaries(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path.string() + ": cannot open file");
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() == 4 && std::memcmp(magic, kUnaryMagic, 4) == 0) {
    unsigned char hdr[8];
    in.read(reinterpret_cast<char*>(hdr), 8);
    if (in.gcount() != 8) throw InputError(path.string() + ": offset 4: truncated header");
    std::uint32_t n = read_u32le(hdr), m = read_u32le(hdr + 4);
    if (n == 0 || m == 0) throw InputError(path.string() + ": offset 4: N and M must be positive");
    std::vector<unsigned char> buf(static_cast<std::size_t>(n) * m * 4);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size())
      throw InputError(path.string() + ": offset " + std::to_string(12 + in.gcount()) + ": truncated data, expected " +
                       std::to_string(buf.size()) + " bytes");
    Matrix u(n, m);
    for (std::size_t k = 0; k < static_cast<std::size_t>(n) * m; ++k) {
      std::uint32_t bits = read_u32le(buf.data() + 4 * k);
      float v;
      std::memcpy(&v, &bits, 4);
      if (!std::isfinite(v))
        throw InputError(path.string() + ": offset " + std::to_string(12 + 4 * k) + ": non-finite unary");
      u.data()[k] = v;
    }
    return u;
  }
  in.close();
  auto rows = read_csv<double>(path);
  if (rows.empty()) throw InputError(path.string() + ": no unary rows");
  const std::size_t m = rows[0].size();
  Matrix u(static_cast<Index>(rows.size()), static_cast<Index>(m));
  for (std::size_t a = 0; a < rows.size(); ++a) {
    if (rows[a].size() != m)
      throw InputError(path.string() + ": row " + std::to_string(a + 1) + ": expected " + std::to_string(m) + " values, got " +
                       std::to_string(rows[a].size()));
    for (std::size_t i = 0; i < m; ++i) {
      if (!std::isfinite(rows[a][i]))
        throw InputError(path.string() + ": row " + std::to_string(a + 1) + ": non-finite unary");
      u(static_cast<Index>(a), static_cast<Index>(i)) = rows[a][i];
    }
  }
  return u;
}

void save_unaries_binary(const std::filesystem::path& path, const Matrix& unaries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(path.string() + ": cannot write file");
  out.write(kUnaryMagic, 4);
  write_u32le(out, static_cast<std::uint32_t>(unaries.rows()));
  write_u32le(out, static_cast<std::uint32_t>(unaries.cols()));
  for (Index k = 0; k < unaries.size(); ++k) {
    float v = static_cast<float>(unaries.data()[k]);
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    write_u32le(out, bits);
  }
}

void save_unaries_csv(const std::filesystem::path& path, const Matrix& unaries) {
  std::ofstream out(path);
  if (!out) throw InputError(path.string() + ": cannot write file");
  out << std::setprecision(17);
  for (Index a = 0; a < unaries.rows(); ++a) {
    for (Index i = 0; i < unaries.cols(); ++i) out << (i ? "," : "") << unaries(a, i);
    out << '\n';
  }
}

std::vector<int> load_index_map(const std::filesystem::path& path, int width, int height) {
  const std::size_t n = static_cast<std::size_t>(width) * height;
  std::vector<int> ids;
  if (is_png(path)) {
    RawPng raw = load_raw_png(path);
    if (static_cast<int>(raw.width) != width || static_cast<int>(raw.height) != height)
      throw InputError(path.string() + ": map is " + std::to_string(raw.width) + "x" + std::to_string(raw.height) +
                       ", image is " + std::to_string(width) + "x" + std::to_string(height));
    if (raw.color_type != PNG_COLOR_TYPE_GRAY && raw.color_type != PNG_COLOR_TYPE_PALETTE)
      throw InputError(path.string() + ": index maps must be single-channel or palette PNGs");
    ids.assign(raw.samples.begin(), raw.samples.end());
  } else {
    for (auto& row : read_csv<int>(path)) ids.insert(ids.end(), row.begin(), row.end());
    if (ids.size() != n)
      throw InputError(path.string() + ": offset " + std::to_string(std::min(ids.size(), n)) + ": expected " +
                       std::to_string(n) + " entries, got " + std::to_string(ids.size()));
    for (std::size_t a = 0; a < ids.size(); ++a) {
      if (ids[a] < 0) throw InputError(path.string() + ": entry " + std::to_string(a) + ": negative id");
    }
  }
  return ids;
}

std::vector<int> grid_superpixels(int width, int height, int block) {
  if (block < 2) throw InvalidInput("grid_superpixels: block must be >= 2");
  if (width < 1 || height < 1) throw InvalidInput("grid_superpixels: empty image");
  const int tiles_x = (width + block - 1) / block;
  std::vector<int> ids(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      int tx = x / block, ty = y / block;
      int tw = std::min(block, width - tx * block), th = std::min(block, height - ty * block);
      ids[static_cast<std::size_t>(y) * width + x] = tw * th < 3 ? 0 : ty * tiles_x + tx + 1;
    }
  }
  return ids;
}

void save_labeling_png(const std::filesystem::path& path, const DiscreteLabeling& x, int width, int height) {
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (x.x.size() != n) throw InvalidInput("save_labeling_png: labeling length does not match image");
  std::vector<std::uint8_t> data(n);
  for (std::size_t a = 0; a < n; ++a) {
    if (x.x[a] < 0 || x.x[a] > 255) throw InvalidInput("save_labeling_png: labels must fit in 8 bits");
    data[a] = static_cast<std::uint8_t>(x.x[a]);
  }
  auto pal = label_palette();
  FilePtr f = open_file(path, "wb");
  char err[256] = "unknown libpng error";
  if (!write_png(f.get(), width, height, PNG_COLOR_TYPE_PALETTE, data.data(), width, &pal, err))
    throw InputError(path.string() + ": " + err);
}

void save_labeling_csv(const std::filesystem::path& path, const DiscreteLabeling& x, int width, int height) {
  if (x.x.size() != static_cast<std::size_t>(width) * height)
    throw InvalidInput("save_labeling_csv: labeling length does not match image");
  std::ofstream out(path);
  if (!out) throw InputError(path.string() + ": cannot write file");
  for (int y = 0; y < height; ++y) {
    for (int c = 0; c < width; ++c) out << (c ? "," : "") << x.x[static_cast<std::size_t>(y) * width + c];
    out << '\n';
  }
}

DiscreteLabeling load_labeling(const std::filesystem::path& path, int width, int height) {
  return {load_index_map(path, width, height)};
}

void save_trace_csv(const std::filesystem::path& path, const EnergyTrace& trace) {
  std::ofstream out(path);
  if (!out) throw InputError(path.string() + ": cannot write file");
  out << "iteration,seconds,discrete_energy,relaxed_objective\n" << std::setprecision(17);
  for (const auto& r : trace.records)
    out << r.iteration << ',' << r.seconds << ',' << r.discrete_energy << ',' << r.relaxed_objective << '\n';
}

}  // namespace dcrf::io
