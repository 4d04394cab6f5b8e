#include "semsoft/dataset_prep.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "semsoft/errors.hpp"
#include "semsoft/rng.hpp"

namespace semsoft {

namespace {

void sort_and_check_unique(std::vector<SampleRecord>& records) {
    std::sort(records.begin(), records.end(),
              [](const SampleRecord& a, const SampleRecord& b) { return a.sample_id < b.sample_id; });
    for (size_t i = 1; i < records.size(); ++i) {
        if (records[i].sample_id == records[i - 1].sample_id) {
            throw Error(ErrorCode::DuplicateSampleId, "duplicate sample_id '" + records[i].sample_id + "'");
        }
    }
}

Split parse_split_field(const nlohmann::json& j, int64_t line_no) {
    if (!j.contains("split") || j.at("split").is_null()) return Split::unassigned;
    const nlohmann::json& s = j.at("split");
    if (s.is_string()) {
        const std::string v = s.get<std::string>();
        if (v == "train") return Split::train;
        if (v == "val") return Split::val;
    }
    throw Error(ErrorCode::MalformedRecord,
                "line " + std::to_string(line_no) + ": split must be \"train\", \"val\" or null", line_no);
}

std::string require_string_field(const nlohmann::json& j, const char* key, int64_t line_no) {
    if (!j.contains(key) || !j.at(key).is_string()) {
        throw Error(ErrorCode::MalformedRecord,
                    "line " + std::to_string(line_no) + ": missing or non-string \"" + key + "\"", line_no);
    }
    return j.at(key).get<std::string>();
}

const char* split_to_cstr(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::unassigned: return nullptr;
    }
    return nullptr;
}

uint32_t read_u32_le(std::istream& in) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    if (!in) throw Error(ErrorCode::IoError, "truncated pixel buffer");
    return static_cast<uint32_t>(bytes[0]) | (static_cast<uint32_t>(bytes[1]) << 8) |
           (static_cast<uint32_t>(bytes[2]) << 16) | (static_cast<uint32_t>(bytes[3]) << 24);
}

void write_u32_le(std::ostream& out, uint32_t value) {
    const unsigned char bytes[4] = {
        static_cast<unsigned char>(value & 0xff),
        static_cast<unsigned char>((value >> 8) & 0xff),
        static_cast<unsigned char>((value >> 16) & 0xff),
        static_cast<unsigned char>((value >> 24) & 0xff),
    };
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

// Per-axis bilinear taps with half-pixel centers; out-of-range source
// coordinates clamp to the border sample.
struct Tap {
    size_t lo;
    size_t hi;
    double frac;
};

std::vector<Tap> make_taps(uint32_t in_size, uint32_t out_size) {
    std::vector<Tap> taps(out_size);
    const double scale = static_cast<double>(in_size) / static_cast<double>(out_size);
    for (uint32_t i = 0; i < out_size; ++i) {
        const double src = (static_cast<double>(i) + 0.5) * scale - 0.5;
        const double base = std::floor(src);
        const int64_t lo = static_cast<int64_t>(base);
        const int64_t max_index = static_cast<int64_t>(in_size) - 1;
        taps[i].lo = static_cast<size_t>(std::clamp<int64_t>(lo, 0, max_index));
        taps[i].hi = static_cast<size_t>(std::clamp<int64_t>(lo + 1, 0, max_index));
        taps[i].frac = src - base;
    }
    return taps;
}

}  // namespace

DatasetManifest parse_manifest_jsonl(std::string_view text) {
    DatasetManifest m;
    size_t pos = 0;
    int64_t line_no = 0;
    while (pos < text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
        const nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(line_no) + ": not a JSON object",
                        line_no);
        }
        SampleRecord record;
        record.sample_id = require_string_field(j, "sample_id", line_no);
        record.class_id = require_string_field(j, "class_id", line_no);
        record.split = parse_split_field(j, line_no);
        m.records.push_back(std::move(record));
    }
    sort_and_check_unique(m.records);
    m.provenance = "parsed";
    return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open manifest '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    DatasetManifest m = parse_manifest_jsonl(buffer.str());
    m.provenance = "loaded " + path.filename().string();
    return m;
}

std::string manifest_to_jsonl(const DatasetManifest& m) {
    std::string out;
    for (const SampleRecord& record : m.records) {
        nlohmann::ordered_json j;
        j["sample_id"] = record.sample_id;
        j["class_id"] = record.class_id;
        const char* split = split_to_cstr(record.split);
        j["split"] = split ? nlohmann::ordered_json(split) : nlohmann::ordered_json(nullptr);
        out += j.dump();
        out += '\n';
    }
    return out;
}

void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write manifest '" + path.string() + "'");
    out << manifest_to_jsonl(m);
    if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

DatasetManifest filter_infrequent(const DatasetManifest& m, int64_t min_samples) {
    if (min_samples < 1) throw Error(ErrorCode::InvalidArgument, "min_samples must be >= 1");
    std::unordered_map<std::string, int64_t> counts;
    for (const SampleRecord& record : m.records) ++counts[record.class_id];
    DatasetManifest out;
    out.records.reserve(m.records.size());
    for (const SampleRecord& record : m.records) {
        if (counts[record.class_id] >= min_samples) out.records.push_back(record);
    }
    if (out.records.empty()) {
        throw Error(ErrorCode::EmptyResult,
                    "every class has fewer than " + std::to_string(min_samples) + " samples");
    }
    out.provenance = m.provenance + "; filter_infrequent(min=" + std::to_string(min_samples) + ")";
    return out;
}

DatasetManifest make_val_split(const DatasetManifest& m, int64_t per_class, uint64_t seed) {
    if (per_class < 0) throw Error(ErrorCode::InvalidArgument, "per_class must be >= 0");
    DatasetManifest out;
    out.records = m.records;

    // Records are globally sorted by sample_id, so per-class position lists
    // are already in sample_id order.
    std::map<std::string, std::vector<size_t>> positions;
    for (size_t i = 0; i < out.records.size(); ++i) positions[out.records[i].class_id].push_back(i);

    for (auto& record : out.records) record.split = Split::train;
    for (const auto& [class_id, rows] : positions) {
        const int64_t n = static_cast<int64_t>(rows.size());
        if (n <= per_class) {
            throw Error(ErrorCode::ClassTooSmall,
                        "class '" + class_id + "' has " + std::to_string(n) + " records, needs more than " +
                            std::to_string(per_class));
        }
        Rng rng(mix_seed(seed, fnv1a64(class_id)));
        std::vector<size_t> pool = rows;
        for (int64_t i = 0; i < per_class; ++i) {
            const size_t j = static_cast<size_t>(i) + static_cast<size_t>(rng.below(static_cast<uint64_t>(n - i)));
            std::swap(pool[static_cast<size_t>(i)], pool[j]);
            out.records[pool[static_cast<size_t>(i)]].split = Split::val;
        }
    }
    out.provenance = m.provenance + "; make_val_split(per_class=" + std::to_string(per_class) +
                     ", seed=" + std::to_string(seed) + ")";
    return out;
}

PixelBuffer PixelBuffer::make(uint32_t width, uint32_t height, std::vector<float> data) {
    if (width < 1 || height < 1) throw Error(ErrorCode::InvalidArgument, "pixel buffer dimensions must be >= 1");
    const size_t expected = static_cast<size_t>(width) * height * 3;
    if (data.size() != expected) {
        throw Error(ErrorCode::DimensionMismatch,
                    "pixel data has " + std::to_string(data.size()) + " values, expected " + std::to_string(expected));
    }
    for (float v : data) {
        if (!(v >= 0.0f && v <= 1.0f)) {
            throw Error(ErrorCode::InvalidArgument, "pixel values must lie in [0, 1]");
        }
    }
    PixelBuffer img;
    img.width = width;
    img.height = height;
    img.channels = 3;
    img.data = std::move(data);
    return img;
}

PixelBuffer squish_resize(const PixelBuffer& img, uint32_t target) {
    if (target < 1) throw Error(ErrorCode::InvalidArgument, "target side length must be >= 1");
    const std::vector<Tap> xs = make_taps(img.width, target);
    const std::vector<Tap> ys = make_taps(img.height, target);

    PixelBuffer out;
    out.width = target;
    out.height = target;
    out.channels = img.channels;
    out.data.resize(static_cast<size_t>(target) * target * img.channels);

    const size_t row_stride = static_cast<size_t>(img.width) * img.channels;
    for (uint32_t oy = 0; oy < target; ++oy) {
        const Tap& ty = ys[oy];
        const float* row_lo = img.data.data() + ty.lo * row_stride;
        const float* row_hi = img.data.data() + ty.hi * row_stride;
        float* dst = out.data.data() + static_cast<size_t>(oy) * target * img.channels;
        for (uint32_t ox = 0; ox < target; ++ox) {
            const Tap& tx = xs[ox];
            for (uint32_t c = 0; c < img.channels; ++c) {
                const double top = (1.0 - tx.frac) * row_lo[tx.lo * img.channels + c] +
                                   tx.frac * row_lo[tx.hi * img.channels + c];
                const double bottom = (1.0 - tx.frac) * row_hi[tx.lo * img.channels + c] +
                                      tx.frac * row_hi[tx.hi * img.channels + c];
                dst[static_cast<size_t>(ox) * img.channels + c] =
                    static_cast<float>((1.0 - ty.frac) * top + ty.frac * bottom);
            }
        }
    }
    return out;
}

PixelBuffer read_pixel_buffer(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open pixel buffer '" + path.string() + "'");
    const uint32_t width = read_u32_le(in);
    const uint32_t height = read_u32_le(in);
    const uint32_t channels = read_u32_le(in);
    if (channels != 3) {
        throw Error(ErrorCode::MalformedRecord, "pixel buffer has " + std::to_string(channels) + " channels, expected 3");
    }
    if (width < 1 || height < 1) throw Error(ErrorCode::MalformedRecord, "pixel buffer dimensions must be >= 1");
    const size_t count = static_cast<size_t>(width) * height * channels;
    std::vector<float> data(count);
    for (size_t i = 0; i < count; ++i) {
        const uint32_t bits = read_u32_le(in);
        data[i] = std::bit_cast<float>(bits);
    }
    return PixelBuffer::make(width, height, std::move(data));
}

void write_pixel_buffer(const PixelBuffer& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write pixel buffer '" + path.string() + "'");
    write_u32_le(out, img.width);
    write_u32_le(out, img.height);
    write_u32_le(out, img.channels);
    for (float v : img.data) write_u32_le(out, std::bit_cast<uint32_t>(v));
    if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

}  // namespace semsoft
