#pragma once

#include "dcrf/model.hpp"
#include "dcrf/trace.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace dcrf::io {

// Raised for unreadable or malformed input; the message names the file and offset.
class InputError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

// Any PNG flavour converted to 8-bit RGB.
RgbImage load_image(const std::filesystem::path& path);
void save_image(const std::filesystem::path& path, const RgbImage& image);

// Unaries as CSV (one row per pixel) or the binary layout: "DCRU", uint32 N, uint32 M
// (little-endian), then N*M little-endian float32 values, pixel-major.
Matrix load_unaries(const std::filesystem::path& path);
void save_unaries_binary(const std::filesystem::path& path, const Matrix& unaries);
void save_unaries_csv(const std::filesystem::path& path, const Matrix& unaries);

// Integer map from a single-channel (8 or 16 bit) or palette PNG, or from CSV. Row-major.
std::vector<int> load_index_map(const std::filesystem::path& path, int width, int height);

// Disjoint block x block tiles with ids from 1; tiles under 3 pixels get 0.
std::vector<int> grid_superpixels(int width, int height, int block);

void save_labeling_png(const std::filesystem::path& path, const DiscreteLabeling& x, int width, int height);
void save_labeling_csv(const std::filesystem::path& path, const DiscreteLabeling& x, int width, int height);
DiscreteLabeling load_labeling(const std::filesystem::path& path, int width, int height);

void save_trace_csv(const std::filesystem::path& path, const EnergyTrace& trace);

}  // namespace dcrf::io
