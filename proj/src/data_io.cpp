#include "iel/data_io.hpp"

#include "iel/diffusion.hpp"
#include "iel/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace iel {

namespace fs = std::filesystem;

void NoiseSpec::validate() const {
    if (window < 1) throw std::invalid_argument("NoiseSpec: window must be >= 1");
    if (fraction < 0.0f || fraction > 1.0f)
        throw std::invalid_argument("NoiseSpec: fraction must lie in [0, 1]");
    if (classes < 2) throw std::invalid_argument("NoiseSpec: classes must be >= 2");
}

// ---- synthetic scenes -------------------------------------------------------

namespace {

// Scene contrast, noise and distractor density. The margins are thin on
// purpose: per-pixel class evidence has to be weak enough, and isolated
// other-class lookalikes frequent enough, that plain training develops the
// noisy-label failure mode at this scale (speckled outputs, corrupted
// windows leaking through), which the inverse layers then counteract.
constexpr float kPixelNoise = 0.15f;
constexpr float kShapeLift = 0.20f;   // how far shape colors sit above the background
constexpr int kSpotDilution = 64;     // one distractor spot per this many pixels

float class_color(int cls, int channel) {
    float u = static_cast<float>(splitmix64(static_cast<std::uint64_t>(cls) * 3 + channel) >> 40) *
              (1.0f / 16777216.0f);
    return kShapeLift * (0.7f + 0.6f * u);  // lift in [0.7, 1.3] * kShapeLift
}

float quantize8(float v) {
    v = std::clamp(v, 0.0f, 1.0f);
    return std::round(v * 255.0f) / 255.0f;
}

}  // namespace

Dataset gen_synthetic(int n, int size, int classes, std::uint64_t seed, const std::string& split) {
    if (n < 0) throw std::invalid_argument("gen_synthetic: n must be >= 0");
    if (size < 4 || size % 4 != 0)
        throw std::invalid_argument("gen_synthetic: size must be a positive multiple of 4");
    if (classes < 2) throw std::invalid_argument("gen_synthetic: classes must be >= 2");
    Dataset ds;
    ds.split = split;
    ds.images.reserve(static_cast<std::size_t>(n));
    ds.clean_masks.reserve(static_cast<std::size_t>(n));
    for (int idx = 0; idx < n; ++idx) {
        Rng rng(Rng::derive(seed, 0x64617461ULL + static_cast<std::uint64_t>(idx)));
        Field img(3, size, size);
        LabelMask mask(size, size, classes);
        float bg[3];
        for (float& b : bg) b = rng.uniform(0.25f, 0.40f);

        // scenes mix a couple of compact blobs with a web of thin bars,
        // so fine true structure dominates the foreground. Fitting it well
        // takes the same high-frequency capacity the label noise fights
        // over, which is where plain training and training through the
        // inverse layers part ways.
        auto paint = [&](int i, int j, int cls, const float* color) {
            if (i < 0 || i >= size || j < 0 || j >= size) return;
            mask.at(i, j) = cls;
            for (int c = 0; c < 3; ++c) img.at(c, i, j) = color[c];
        };
        for (int i = 0; i < size; ++i)
            for (int j = 0; j < size; ++j) paint(i, j, 0, bg);

        int n_blobs = 1 + static_cast<int>(rng.uniform_int(3));
        for (int s = 0; s < n_blobs; ++s) {
            bool ellipse = rng.uniform_int(2) == 0;
            int cls = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(classes - 1)));
            int ci = size / 4 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(size / 2)));
            int cj = size / 4 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(size / 2)));
            int ri = std::max(2, size / 8) + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(std::max(1, size / 8))));
            int rj = std::max(2, size / 8) + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(std::max(1, size / 8))));
            float color[3];
            for (int c = 0; c < 3; ++c)
                color[c] = std::clamp(bg[c] + class_color(cls, c) + rng.uniform(-0.02f, 0.02f),
                                      0.0f, 0.95f);
            for (int i = std::max(0, ci - ri); i <= std::min(size - 1, ci + ri); ++i)
                for (int j = std::max(0, cj - rj); j <= std::min(size - 1, cj + rj); ++j) {
                    bool inside;
                    if (ellipse) {
                        float di = static_cast<float>(i - ci) / static_cast<float>(ri);
                        float dj = static_cast<float>(j - cj) / static_cast<float>(rj);
                        inside = di * di + dj * dj <= 1.0f;
                    } else {
                        inside = true;
                    }
                    if (inside) paint(i, j, cls, color);
                }
        }

        int n_bars = 1 + static_cast<int>(rng.uniform_int(2));
        const int dirs[4][2] = {{0, 1}, {1, 0}, {1, 1}, {1, -1}};
        for (int b = 0; b < n_bars; ++b) {
            const int* d = dirs[rng.uniform_int(4)];
            int width = 1 + static_cast<int>(rng.uniform_int(2));
            int len = std::max(2, size / 4) + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(std::max(1, size / 4))));
            int i0 = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(size)));
            int j0 = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(size)));
            int cls = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(classes - 1)));
            float color[3];
            for (int c = 0; c < 3; ++c)
                color[c] = std::clamp(bg[c] + class_color(cls, c) + rng.uniform(-0.02f, 0.02f),
                                      0.0f, 0.95f);
            for (int t = 0; t < len; ++t) {
                int i = i0 + t * d[0];
                int j = j0 + t * d[1];
                for (int o = 0; o < width; ++o)
                    paint(d[0] == 0 ? i + o : i, d[0] == 0 ? j : j + o, cls, color);
            }
        }
        // distractor spots: small patches colored like the other class,
        // labels untouched. Only context tells them apart from the label
        // islands the window noise creates; a model dragged toward
        // high-frequency exceptions by the noise starts firing on them,
        // one kept smooth does not.
        int n_spots = size * size / kSpotDilution;
        for (int s = 0; s < n_spots; ++s) {
            int si = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(size)));
            int sj = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(size)));
            int sr = rng.uniform_int(4) == 0 ? 2 : 1;
            bool fg_here = mask.at(si, sj) != 0;
            float spot[3];
            if (fg_here) {
                for (int c = 0; c < 3; ++c) spot[c] = bg[c];
            } else {
                int cls = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(classes - 1)));
                for (int c = 0; c < 3; ++c)
                    spot[c] = std::clamp(bg[c] + class_color(cls, c), 0.0f, 0.95f);
            }
            for (int i = std::max(0, si - sr + 1); i <= std::min(size - 1, si + sr - 1); ++i)
                for (int j = std::max(0, sj - sr + 1); j <= std::min(size - 1, sj + sr - 1); ++j)
                    for (int c = 0; c < 3; ++c) img.at(c, i, j) = spot[c];
        }
        // pixel noise on top, quantized to the 8-bit grid
        for (float& v : img.values) v = quantize8(v + rng.uniform(-kPixelNoise, kPixelNoise));
        ds.images.push_back(std::move(img));
        ds.clean_masks.push_back(std::move(mask));
    }
    return ds;
}

LabelMask inject_window_noise(const LabelMask& mask, const NoiseSpec& spec) {
    spec.validate();
    const int k = spec.window;
    if (k > mask.rows || k > mask.cols)
        throw std::invalid_argument("inject_window_noise: window exceeds mask dimensions");
    const int grid_rows = mask.rows / k;
    const int grid_cols = mask.cols / k;
    const long long total = static_cast<long long>(grid_rows) * grid_cols;
    const long long want = static_cast<long long>(
        std::floor(static_cast<double>(spec.fraction) * mask.rows * mask.cols / (static_cast<double>(k) * k)));
    if (want > total)
        throw std::invalid_argument("inject_window_noise: fraction demands more windows than the aligned grid holds");

    Rng rng(spec.seed);
    std::vector<long long> order(static_cast<std::size_t>(total));
    for (long long t = 0; t < total; ++t) order[static_cast<std::size_t>(t)] = t;
    // partial Fisher-Yates: the first `want` entries are a uniform sample
    // without replacement
    for (long long t = 0; t < want; ++t) {
        long long pick = t + static_cast<long long>(rng.uniform_int(static_cast<std::uint64_t>(total - t)));
        std::swap(order[static_cast<std::size_t>(t)], order[static_cast<std::size_t>(pick)]);
    }
    LabelMask noisy = mask;
    for (long long t = 0; t < want; ++t) {
        long long w = order[static_cast<std::size_t>(t)];
        int wi = static_cast<int>(w / grid_cols) * k;
        int wj = static_cast<int>(w % grid_cols) * k;
        std::int32_t cls = static_cast<std::int32_t>(rng.uniform_int(static_cast<std::uint64_t>(spec.classes)));
        for (int i = wi; i < wi + k; ++i)
            for (int j = wj; j < wj + k; ++j) noisy.at(i, j) = cls;
    }
    return noisy;
}

void inject_dataset_noise(Dataset& ds, const NoiseSpec& spec) {
    spec.validate();
    ds.noisy_masks.clear();
    ds.noisy_masks.reserve(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        NoiseSpec per = spec;
        per.seed = Rng::derive(spec.seed, 0x6e6f697365ULL + i);
        ds.noisy_masks.push_back(inject_window_noise(ds.clean_masks[i], per));
    }
}

LabelMask argmax_mask(const Field& logits) {
    LabelMask out(logits.rows, logits.cols, std::max(2, logits.channels));
    const std::size_t plane = logits.plane_size();
    for (std::size_t px = 0; px < plane; ++px) {
        int best = 0;
        float bv = logits.values[px];
        for (int c = 1; c < logits.channels; ++c) {
            float v = logits.values[plane * static_cast<std::size_t>(c) + px];
            if (v > bv) {
                bv = v;
                best = c;
            }
        }
        out.ids[px] = best;
    }
    return out;
}

LabelMask preprocess_labels(const LabelMask& mask, int n, float dt) {
    Field onehot(mask.classes, mask.rows, mask.cols);
    const std::size_t plane = onehot.plane_size();
    for (std::size_t px = 0; px < plane; ++px)
        onehot.values[plane * static_cast<std::size_t>(mask.ids[px]) + px] = 1.0f;
    DiffusionConfig cfg{dt, n, 1.0f};
    return argmax_mask(apply_fels(onehot, cfg));
}

LabelMask postprocess_predictions(const Field& logits, int n, float dt) {
    DiffusionConfig cfg{dt, n, logits.spacing};
    return argmax_mask(apply_fels(logits, cfg));
}

// ---- low-level IO -----------------------------------------------------------

namespace {

[[noreturn]] void parse_fail(const std::string& path, const char* what, long long offset) {
    throw std::runtime_error(path + ": " + what + " at byte " + std::to_string(offset));
}

std::string read_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return data;
}

void write_binary(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw std::runtime_error("short write to " + path);
}

// netpbm token scanner: skips whitespace and # comments
struct PnmScanner {
    const std::string& data;
    const std::string& path;
    std::size_t pos = 0;

    void skip_space() {
        while (pos < data.size()) {
            char c = data[pos];
            if (c == '#') {
                while (pos < data.size() && data[pos] != '\n') ++pos;
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                ++pos;
            } else {
                break;
            }
        }
    }

    // scans comments for "# classes=N" while skipping
    int scan_classes_comment() {
        int found = -1;
        std::size_t p = pos;
        while (p < data.size()) {
            char c = data[p];
            if (c == '#') {
                std::size_t end = data.find('\n', p);
                std::string line = data.substr(p, end == std::string::npos ? std::string::npos : end - p);
                int v = 0;
                if (std::sscanf(line.c_str(), "# classes=%d", &v) == 1) found = v;
                p = end == std::string::npos ? data.size() : end;
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                ++p;
            } else {
                break;
            }
        }
        return found;
    }

    long long next_int() {
        skip_space();
        if (pos >= data.size() || data[pos] < '0' || data[pos] > '9')
            parse_fail(path, "expected integer", static_cast<long long>(pos));
        long long v = 0;
        while (pos < data.size() && data[pos] >= '0' && data[pos] <= '9') {
            v = v * 10 + (data[pos] - '0');
            ++pos;
        }
        return v;
    }
};

void append_le_f32(std::string& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    char b[4];
    std::memcpy(b, &bits, 4);
    out.append(b, 4);
}

float read_le_f32(const char* p) {
    std::uint32_t bits;
    std::memcpy(&bits, p, 4);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

}  // namespace

void write_pgm(const std::string& path, const LabelMask& mask) {
    if (mask.classes > 256)
        throw std::invalid_argument("write_pgm: ids do not fit 8 bits (classes > 256)");
    mask.validate();
    std::string out;
    char header[96];
    std::snprintf(header, sizeof(header), "P5\n# classes=%d\n%d %d\n255\n", mask.classes,
                  mask.cols, mask.rows);
    out = header;
    out.reserve(out.size() + mask.size());
    for (std::int32_t id : mask.ids) out.push_back(static_cast<char>(static_cast<unsigned char>(id)));
    write_binary(path, out);
}

LabelMask read_pgm(const std::string& path) {
    std::string data = read_binary(path);
    if (data.size() < 2 || data[0] != 'P' || data[1] != '5')
        parse_fail(path, "bad PGM magic (want P5)", 0);
    PnmScanner sc{data, path, 2};
    int classes_hint = sc.scan_classes_comment();
    long long w = sc.next_int();
    long long h = sc.next_int();
    long long maxval = sc.next_int();
    if (w < 1 || h < 1) parse_fail(path, "bad dimensions", static_cast<long long>(sc.pos));
    if (maxval != 255) parse_fail(path, "unsupported maxval (want 255)", static_cast<long long>(sc.pos));
    if (sc.pos >= data.size()) parse_fail(path, "missing raster", static_cast<long long>(sc.pos));
    ++sc.pos;  // single whitespace byte after maxval
    if (data.size() - sc.pos < static_cast<std::size_t>(w * h))
        parse_fail(path, "truncated raster", static_cast<long long>(data.size()));
    std::int32_t max_id = 0;
    std::vector<std::int32_t> ids(static_cast<std::size_t>(w * h));
    for (std::size_t t = 0; t < ids.size(); ++t) {
        ids[t] = static_cast<unsigned char>(data[sc.pos + t]);
        max_id = std::max(max_id, ids[t]);
    }
    LabelMask mask(static_cast<int>(h), static_cast<int>(w),
                   classes_hint > 0 ? classes_hint : std::max(2, max_id + 1));
    mask.ids = std::move(ids);
    mask.validate();
    return mask;
}

void write_ppm(const std::string& path, const Field& image) {
    if (image.channels != 3) throw std::invalid_argument("write_ppm: image must have 3 channels");
    std::string out;
    char header[64];
    std::snprintf(header, sizeof(header), "P6\n%d %d\n255\n", image.cols, image.rows);
    out = header;
    out.reserve(out.size() + image.size());
    const std::size_t plane = image.plane_size();
    for (std::size_t px = 0; px < plane; ++px)
        for (int c = 0; c < 3; ++c) {
            float v = std::clamp(image.values[plane * static_cast<std::size_t>(c) + px], 0.0f, 1.0f);
            out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0f))));
        }
    write_binary(path, out);
}

Field read_ppm(const std::string& path) {
    std::string data = read_binary(path);
    if (data.size() < 2 || data[0] != 'P' || data[1] != '6')
        parse_fail(path, "bad PPM magic (want P6)", 0);
    PnmScanner sc{data, path, 2};
    long long w = sc.next_int();
    long long h = sc.next_int();
    long long maxval = sc.next_int();
    if (w < 1 || h < 1) parse_fail(path, "bad dimensions", static_cast<long long>(sc.pos));
    if (maxval != 255) parse_fail(path, "unsupported maxval (want 255)", static_cast<long long>(sc.pos));
    ++sc.pos;
    if (data.size() - sc.pos < static_cast<std::size_t>(w * h * 3))
        parse_fail(path, "truncated raster", static_cast<long long>(data.size()));
    Field img(3, static_cast<int>(h), static_cast<int>(w));
    const std::size_t plane = img.plane_size();
    for (std::size_t px = 0; px < plane; ++px)
        for (int c = 0; c < 3; ++c)
            img.values[plane * static_cast<std::size_t>(c) + px] =
                static_cast<float>(static_cast<unsigned char>(data[sc.pos + px * 3 + c])) / 255.0f;
    return img;
}

namespace {

void append_field_record(std::string& out, const Field& f) {
    char header[96];
    std::snprintf(header, sizeof(header), "FLD1\n%d %d %d %.9g\n", f.channels, f.rows, f.cols,
                  static_cast<double>(f.spacing));
    out += header;
    for (float v : f.values) append_le_f32(out, v);
}

Field parse_field_record(const std::string& data, const std::string& path, std::size_t& pos) {
    if (data.size() - pos < 5 || data.compare(pos, 5, "FLD1\n") != 0)
        parse_fail(path, "bad FLD1 magic", static_cast<long long>(pos));
    std::size_t line_end = data.find('\n', pos + 5);
    if (line_end == std::string::npos)
        parse_fail(path, "missing FLD1 header line", static_cast<long long>(pos + 5));
    std::string header = data.substr(pos + 5, line_end - pos - 5);
    int channels = 0, rows = 0, cols = 0;
    double spacing = 0.0;
    if (std::sscanf(header.c_str(), "%d %d %d %lf", &channels, &rows, &cols, &spacing) != 4)
        parse_fail(path, "malformed FLD1 header", static_cast<long long>(pos + 5));
    if (channels < 1 || rows < 1 || cols < 1 || !(spacing > 0.0))
        parse_fail(path, "invalid FLD1 dimensions", static_cast<long long>(pos + 5));
    pos = line_end + 1;
    std::size_t count = static_cast<std::size_t>(channels) * rows * cols;
    if (data.size() - pos < count * 4)
        parse_fail(path, "truncated FLD1 data", static_cast<long long>(data.size()));
    Field f(channels, rows, cols, static_cast<float>(spacing));
    for (std::size_t t = 0; t < count; ++t) f.values[t] = read_le_f32(data.data() + pos + t * 4);
    pos += count * 4;
    if (!f.all_finite()) parse_fail(path, "non-finite FLD1 values", static_cast<long long>(pos));
    return f;
}

}  // namespace

void write_field(const std::string& path, const Field& f) {
    std::string out;
    append_field_record(out, f);
    write_binary(path, out);
}

Field read_field(const std::string& path) {
    std::string data = read_binary(path);
    std::size_t pos = 0;
    Field f = parse_field_record(data, path, pos);
    if (pos != data.size()) parse_fail(path, "trailing bytes after record", static_cast<long long>(pos));
    return f;
}

void write_fields(const std::string& path, const std::vector<Field>& fs) {
    std::string out;
    for (const Field& f : fs) append_field_record(out, f);
    write_binary(path, out);
}

std::vector<Field> read_fields(const std::string& path) {
    std::string data = read_binary(path);
    std::vector<Field> fs;
    std::size_t pos = 0;
    while (pos < data.size()) fs.push_back(parse_field_record(data, path, pos));
    return fs;
}

void save_params(const std::string& path, const ModelParams& params) {
    std::vector<Field> records;
    records.reserve(params.layers.size() * 2);
    for (const auto& l : params.layers) {
        records.push_back(l.filters);
        records.push_back(l.bias);
    }
    write_fields(path, records);
}

ModelParams load_params(const std::string& path) {
    std::vector<Field> records = read_fields(path);
    if (records.size() != 22)
        throw std::runtime_error(path + ": expected 22 parameter records, found " +
                                 std::to_string(records.size()));
    int classes = records[21].channels;  // head bias
    ModelParams params = init_params(0, classes);
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        ConvLayer& layer = params.layers[l];
        const Field& filt = records[l * 2];
        const Field& bias = records[l * 2 + 1];
        if (!filt.same_shape(layer.filters) || !bias.same_shape(layer.bias))
            throw std::runtime_error(path + ": record shape mismatch for layer " + layer.name);
        layer.filters = filt;
        layer.bias = bias;
    }
    return params;
}

std::string metrics_csv_string(const std::vector<MetricsRow>& rows) {
    std::string out = "epoch,split,variant,dice,miou,noise_rate,loss\n";
    char line[256];
    for (const MetricsRow& r : rows) {
        std::snprintf(line, sizeof(line), "%d,%s,%s,%.6f,%.6f,%.6f,%.6f\n", r.epoch,
                      r.split.c_str(), r.variant.c_str(), r.dice, r.miou, r.noise_rate, r.loss);
        out += line;
    }
    return out;
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
    write_binary(path, metrics_csv_string(rows));
}

void save_dataset(const std::string& dir, const Dataset& ds) {
    fs::path root(dir);
    fs::create_directories(root / ds.split);
    nlohmann::json meta;
    if (fs::exists(root / "meta.json")) {
        std::ifstream in(root / "meta.json");
        in >> meta;
    }
    meta[ds.split] = {{"n", ds.size()},
                      {"rows", ds.size() ? ds.images[0].rows : 0},
                      {"cols", ds.size() ? ds.images[0].cols : 0},
                      {"classes", ds.size() ? ds.clean_masks[0].classes : 0},
                      {"has_noisy", !ds.noisy_masks.empty()}};
    {
        std::ofstream out(root / "meta.json");
        out << meta.dump(2) << "\n";
    }
    char name[64];
    for (std::size_t i = 0; i < ds.size(); ++i) {
        std::snprintf(name, sizeof(name), "img_%04zu.ppm", i);
        write_ppm((root / ds.split / name).string(), ds.images[i]);
        std::snprintf(name, sizeof(name), "clean_%04zu.pgm", i);
        write_pgm((root / ds.split / name).string(), ds.clean_masks[i]);
        if (!ds.noisy_masks.empty()) {
            std::snprintf(name, sizeof(name), "noisy_%04zu.pgm", i);
            write_pgm((root / ds.split / name).string(), ds.noisy_masks[i]);
        }
    }
}

Dataset load_dataset(const std::string& dir, const std::string& split) {
    fs::path root(dir);
    std::ifstream in(root / "meta.json");
    if (!in) throw std::runtime_error("cannot open " + (root / "meta.json").string());
    nlohmann::json meta;
    in >> meta;
    if (!meta.contains(split))
        throw std::runtime_error(dir + ": meta.json has no '" + split + "' split");
    const auto& m = meta[split];
    Dataset ds;
    ds.split = split;
    std::size_t n = m.at("n").get<std::size_t>();
    bool has_noisy = m.at("has_noisy").get<bool>();
    char name[64];
    for (std::size_t i = 0; i < n; ++i) {
        std::snprintf(name, sizeof(name), "img_%04zu.ppm", i);
        ds.images.push_back(read_ppm((root / split / name).string()));
        std::snprintf(name, sizeof(name), "clean_%04zu.pgm", i);
        ds.clean_masks.push_back(read_pgm((root / split / name).string()));
        if (has_noisy) {
            std::snprintf(name, sizeof(name), "noisy_%04zu.pgm", i);
            ds.noisy_masks.push_back(read_pgm((root / split / name).string()));
        }
    }
    return ds;
}

}  // namespace iel
