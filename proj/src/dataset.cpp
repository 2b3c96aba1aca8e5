#include "photorc/dataset.hpp"

#include "photorc/errors.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>

namespace photorc {

namespace fs = std::filesystem;

namespace {

constexpr std::uint32_t kImageMagic = 2051;
constexpr std::uint32_t kLabelMagic = 2049;

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset, const std::string& name) {
    if (offset + 4 > bytes.size()) {
        throw FormatError(name + ": header truncated at offset " + std::to_string(offset) + " (file has " +
                          std::to_string(bytes.size()) + " bytes)");
    }
    return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
           (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void put_be32(std::ostream& os, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                       static_cast<char>(v)};
    os.write(b, 4);
}

std::vector<std::uint8_t> slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

Eigen::MatrixXd IdxImages::image(std::size_t i) const {
    if (i >= static_cast<std::size_t>(count)) throw InvalidParameter("image index out of range");
    Eigen::MatrixXd m(rows, cols);
    const std::size_t base = i * static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            m(r, c) = pixels[base + static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)] / 255.0;
        }
    }
    return m;
}

IdxImages parse_idx_images(std::span<const std::uint8_t> bytes, const std::string& name) {
    const auto magic = read_be32(bytes, 0, name);
    if (magic != kImageMagic) {
        throw FormatError(name + ": magic " + std::to_string(magic) + " at offset 0, expected " + std::to_string(kImageMagic));
    }
    IdxImages out;
    out.count = static_cast<int>(read_be32(bytes, 4, name));
    out.rows = static_cast<int>(read_be32(bytes, 8, name));
    out.cols = static_cast<int>(read_be32(bytes, 12, name));
    if (out.count < 0 || out.rows <= 0 || out.cols <= 0) throw FormatError(name + ": bad dimensions at offset 4");
    const std::size_t expected =
        16 + static_cast<std::size_t>(out.count) * static_cast<std::size_t>(out.rows) * static_cast<std::size_t>(out.cols);
    if (bytes.size() != expected) {
        throw FormatError(name + ": expected " + std::to_string(expected) + " bytes for " + std::to_string(out.count) +
                          " images of " + std::to_string(out.rows) + "x" + std::to_string(out.cols) + ", found " +
                          std::to_string(bytes.size()));
    }
    out.pixels.assign(bytes.begin() + 16, bytes.end());
    return out;
}

std::vector<int> parse_idx_labels(std::span<const std::uint8_t> bytes, const std::string& name) {
    const auto magic = read_be32(bytes, 0, name);
    if (magic != kLabelMagic) {
        throw FormatError(name + ": magic " + std::to_string(magic) + " at offset 0, expected " + std::to_string(kLabelMagic));
    }
    const auto count = read_be32(bytes, 4, name);
    const std::size_t expected = 8 + static_cast<std::size_t>(count);
    if (bytes.size() != expected) {
        throw FormatError(name + ": expected " + std::to_string(expected) + " bytes for " + std::to_string(count) +
                          " labels, found " + std::to_string(bytes.size()));
    }
    std::vector<int> labels(bytes.begin() + 8, bytes.end());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] > 9) {
            throw FormatError(name + ": label " + std::to_string(labels[i]) + " at offset " + std::to_string(8 + i) +
                              " is outside [0, 9]");
        }
    }
    return labels;
}

IdxImages read_idx_images(const fs::path& path) { return parse_idx_images(slurp(path), path.string()); }

std::vector<int> read_idx_labels(const fs::path& path) { return parse_idx_labels(slurp(path), path.string()); }

void write_idx_images(const fs::path& path, const IdxImages& images) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    put_be32(out, kImageMagic);
    put_be32(out, static_cast<std::uint32_t>(images.count));
    put_be32(out, static_cast<std::uint32_t>(images.rows));
    put_be32(out, static_cast<std::uint32_t>(images.cols));
    out.write(reinterpret_cast<const char*>(images.pixels.data()), static_cast<std::streamsize>(images.pixels.size()));
}

void write_idx_labels(const fs::path& path, std::span<const int> labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    put_be32(out, kLabelMagic);
    put_be32(out, static_cast<std::uint32_t>(labels.size()));
    for (int l : labels) out.put(static_cast<char>(l));
}

MnistData load_mnist(const fs::path& dir) {
    MnistData d;
    auto train = read_idx_images(dir / "train-images-idx3-ubyte");
    auto train_labels = read_idx_labels(dir / "train-labels-idx1-ubyte");
    auto test = read_idx_images(dir / "t10k-images-idx3-ubyte");
    auto test_labels = read_idx_labels(dir / "t10k-labels-idx1-ubyte");
    if (train.count != static_cast<int>(train_labels.size()) || test.count != static_cast<int>(test_labels.size())) {
        throw FormatError("MNIST image and label counts disagree");
    }
    if (train.rows != test.rows || train.cols != test.cols) throw FormatError("MNIST train/test image sizes differ");
    d.images = std::move(train);
    d.images.pixels.insert(d.images.pixels.end(), test.pixels.begin(), test.pixels.end());
    d.images.count += test.count;
    d.train_count = train_labels.size();
    d.labels = std::move(train_labels);
    d.labels.insert(d.labels.end(), test_labels.begin(), test_labels.end());
    return d;
}

fs::path data_root() {
    const char* env = std::getenv("PHOTORC_DATA_ROOT");
    return env ? fs::path(env) : fs::path();
}

fs::path resolve_data_path(const std::string& path) {
    fs::path p(path);
    const auto root = data_root();
    if (p.is_relative() && !root.empty()) return root / p;
    return p;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_number(const std::string& s, const fs::path& path, std::size_t line) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    while (b < e && *b == ' ') ++b;
    while (e > b && e[-1] == ' ') --e;
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e) {
        throw FormatError(path.string() + ":" + std::to_string(line) + ": '" + s + "' is not a number");
    }
    return v;
}

}  // namespace

Sequence read_matrix_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    Sequence frames;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv(line);
        Eigen::VectorXd f(static_cast<Eigen::Index>(cells.size()));
        for (std::size_t k = 0; k < cells.size(); ++k) f(static_cast<Eigen::Index>(k)) = parse_number(cells[k], path, n);
        if (!frames.empty() && f.size() != frames.front().size()) {
            throw FormatError(path.string() + ":" + std::to_string(n) + ": row has " + std::to_string(f.size()) +
                              " columns, expected " + std::to_string(frames.front().size()));
        }
        frames.push_back(std::move(f));
    }
    if (frames.empty()) throw FormatError(path.string() + ": no rows");
    return frames;
}

void write_matrix_csv(const fs::path& path, const Sequence& frames) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    for (const auto& f : frames) {
        for (Eigen::Index k = 0; k < f.size(); ++k) {
            if (k) out << ',';
            out << format_double(f(k));
        }
        out << '\n';
    }
}

std::vector<SequenceSample> load_sequence_dataset(const fs::path& manifest) {
    std::ifstream in(manifest);
    if (!in) throw FormatError("cannot open manifest " + manifest.string());
    std::string line;
    if (!std::getline(in, line) || split_csv(line) != std::vector<std::string>{"sample_file", "label", "source_id", "split_group"}) {
        throw FormatError(manifest.string() + ": header must be 'sample_file,label,source_id,split_group'");
    }
    std::vector<SequenceSample> out;
    std::size_t n = 1;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv(line);
        if (cells.size() != 4) throw FormatError(manifest.string() + ":" + std::to_string(n) + ": expected 4 fields");
        SequenceSample s;
        s.frames = read_matrix_csv(manifest.parent_path() / cells[0]);
        s.label = static_cast<int>(parse_number(cells[1], manifest, n));
        s.source_id = cells[2];
        s.group = static_cast<int>(parse_number(cells[3], manifest, n));
        out.push_back(std::move(s));
    }
    return out;
}

void write_sequence_dataset(const fs::path& dir, std::span<const SequenceSample> samples) {
    fs::create_directories(dir);
    std::ofstream manifest(dir / "manifest.csv", std::ios::binary);
    if (!manifest) throw FormatError("cannot write manifest in " + dir.string());
    manifest << "sample_file,label,source_id,split_group\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
        std::ostringstream name;
        name << "sample_" << i << ".csv";
        write_matrix_csv(dir / name.str(), samples[i].frames);
        manifest << name.str() << ',' << samples[i].label << ',' << samples[i].source_id << ',' << samples[i].group
                 << '\n';
    }
}

}  // namespace photorc
