#ifndef SEMSOFT_DATASET_PREP_HPP
#define SEMSOFT_DATASET_PREP_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace semsoft {

enum class Split : uint8_t { train, val, unassigned };

struct SampleRecord {
    std::string sample_id;
    std::string class_id;
    Split split = Split::unassigned;
};

// Ordered collection of labeled samples; records stay sorted by sample_id
// after every transform. `provenance` accumulates the applied transforms.
struct DatasetManifest {
    std::vector<SampleRecord> records;
    std::string provenance;
};

// JSONL, one object per line:
//   {"sample_id": string, "class_id": string, "split": "train"|"val"|null}
DatasetManifest parse_manifest_jsonl(std::string_view text);
DatasetManifest load_manifest(const std::filesystem::path& path);
std::string manifest_to_jsonl(const DatasetManifest& m);
void save_manifest(const DatasetManifest& m, const std::filesystem::path& path);

// Drops every class with fewer than min_samples records ("fewer than" is
// strict: a class with exactly min_samples survives).
DatasetManifest filter_infrequent(const DatasetManifest& m, int64_t min_samples = 500);

// Marks exactly per_class records of every class as val and the rest as
// train. The draw is a seeded uniform selection without replacement over the
// class's records sorted by sample_id; identical seed and manifest give an
// identical split.
DatasetManifest make_val_split(const DatasetManifest& m, int64_t per_class = 50, uint64_t seed = 0);

// RGB image with row-major channel-interleaved values in [0, 1].
struct PixelBuffer {
    uint32_t width = 0;
    uint32_t height = 0;
    uint32_t channels = 3;
    std::vector<float> data;

    static PixelBuffer make(uint32_t width, uint32_t height, std::vector<float> data);
    float at(uint32_t x, uint32_t y, uint32_t c) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
};

// Non-aspect-preserving bilinear resize to target x target with half-pixel
// centers; a target equal to the input size reproduces the input exactly.
PixelBuffer squish_resize(const PixelBuffer& img, uint32_t target = 224);

// Flat binary format: 12-byte header of 3 little-endian u32 (width, height,
// channels) followed by width*height*channels little-endian 32-bit floats.
PixelBuffer read_pixel_buffer(const std::filesystem::path& path);
void write_pixel_buffer(const PixelBuffer& img, const std::filesystem::path& path);

}  // namespace semsoft

#endif  // SEMSOFT_DATASET_PREP_HPP
