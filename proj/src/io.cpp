#include "camokit/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "binary embedding formats are little-endian");

namespace camokit::io {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ParseError("cannot open for writing: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw ParseError("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

namespace {

void append_u32(std::string& out, std::uint32_t v) {
    char bytes[4];
    std::memcpy(bytes, &v, 4);
    out.append(bytes, 4);
}

std::uint32_t take_u32(const std::string& data, std::size_t& offset,
                       const fs::path& path) {
    if (offset + 4 > data.size()) {
        throw ParseError("truncated header: " + path.string());
    }
    std::uint32_t v;
    std::memcpy(&v, data.data() + offset, 4);
    offset += 4;
    return v;
}

void append_doubles(std::string& out, std::span<const double> values) {
    const std::size_t bytes = values.size() * sizeof(double);
    const std::size_t start = out.size();
    out.resize(start + bytes);
    std::memcpy(out.data() + start, values.data(), bytes);
}

std::vector<double> take_doubles(const std::string& data, std::size_t& offset,
                                 std::size_t count, const fs::path& path) {
    const std::size_t bytes = count * sizeof(double);
    if (offset + bytes > data.size()) {
        throw ParseError("truncated payload: " + path.string());
    }
    std::vector<double> values(count);
    std::memcpy(values.data(), data.data() + offset, bytes);
    offset += bytes;
    return values;
}

fs::path sidecar_path(const fs::path& path) {
    fs::path p = path;
    p.replace_extension();
    p += ".labels.txt";
    return p;
}

}  // namespace

void write_subdescription_file(const fs::path& path,
                               const SubDescriptionSet& set) {
    std::string blob;
    append_u32(blob, static_cast<std::uint32_t>(set.class_id));
    append_u32(blob, static_cast<std::uint32_t>(set.embeddings.rows));
    append_u32(blob, static_cast<std::uint32_t>(set.embeddings.cols));
    append_doubles(blob, set.embeddings.data);
    write_file_atomic(path, blob);
    if (!set.labels.empty()) {
        std::string labels;
        for (const std::string& label : set.labels) {
            labels += label;
            labels += '\n';
        }
        write_file_atomic(sidecar_path(path), labels);
    }
}

SubDescriptionSet read_subdescription_file(const fs::path& path) {
    const std::string blob = read_file(path);
    std::size_t offset = 0;
    const std::uint32_t class_id = take_u32(blob, offset, path);
    const std::uint32_t k = take_u32(blob, offset, path);
    const std::uint32_t d = take_u32(blob, offset, path);
    if (k == 0 || d == 0) {
        throw ParseError("embedding file with empty shape: " + path.string());
    }
    Matrix m(k, d, take_doubles(blob, offset, std::size_t(k) * d, path));

    std::vector<std::string> labels;
    const fs::path sidecar = sidecar_path(path);
    if (fs::exists(sidecar)) {
        labels = read_lines(sidecar);
        if (labels.size() != k) {
            throw ParseError("sidecar lists " + std::to_string(labels.size()) +
                             " labels for " + std::to_string(k) + " rows: " +
                             sidecar.string());
        }
    }
    return make_subdescription_set(static_cast<int>(class_id), std::move(labels),
                                   std::move(m));
}

void write_embedding_field_file(const fs::path& path,
                                const EmbeddingField& field) {
    std::string blob;
    append_u32(blob, static_cast<std::uint32_t>(field.embeddings.size()));
    append_u32(blob, static_cast<std::uint32_t>(field.embeddings.front().size()));
    for (const Vector& v : field.embeddings) append_doubles(blob, v);
    write_file_atomic(path, blob);
}

EmbeddingField read_embedding_field_file(const fs::path& path) {
    const std::string blob = read_file(path);
    std::size_t offset = 0;
    const std::uint32_t n = take_u32(blob, offset, path);
    const std::uint32_t d = take_u32(blob, offset, path);
    if (n == 0 || d == 0) {
        throw ParseError("field file with empty shape: " + path.string());
    }
    std::vector<Vector> embeddings;
    embeddings.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        embeddings.push_back(take_doubles(blob, offset, d, path));
    }
    return EmbeddingField::from(std::move(embeddings));
}

namespace {

std::vector<std::vector<std::string>> split_fields(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream stream(text);
    std::string line;
    while (std::getline(stream, line)) {
        std::istringstream fields(line);
        std::vector<std::string> parts;
        std::string part;
        while (fields >> part) parts.push_back(part);
        rows.push_back(std::move(parts));
    }
    return rows;
}

double parse_double(const std::string& s, std::size_t line_no) {
    std::size_t consumed = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &consumed);
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": bad number '" + s + "'");
    }
    if (consumed != s.size()) {
        throw ParseError("line " + std::to_string(line_no) + ": bad number '" + s + "'");
    }
    return v;
}

int parse_int(const std::string& s, std::size_t line_no) {
    try {
        std::size_t consumed = 0;
        const int v = std::stoi(s, &consumed);
        if (consumed != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": bad integer '" + s + "'");
    }
}

BBox parse_corners(const std::vector<std::string>& parts, std::size_t first,
                   std::size_t line_no) {
    BBox b{parse_double(parts[first], line_no), parse_double(parts[first + 1], line_no),
           parse_double(parts[first + 2], line_no),
           parse_double(parts[first + 3], line_no)};
    if (!b.valid()) {
        throw ValidationError("line " + std::to_string(line_no) + ": invalid box");
    }
    return b;
}

}  // namespace

std::string format_detections(std::span<const DetectionRecord> dets) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(6);
    for (const DetectionRecord& d : dets) {
        out << d.image_id << ' ' << d.class_index << ' ' << d.box.x1 << ' '
            << d.box.y1 << ' ' << d.box.x2 << ' ' << d.box.y2 << ' '
            << d.confidence << '\n';
    }
    return out.str();
}

std::vector<DetectionRecord> parse_detections(const std::string& text) {
    std::vector<DetectionRecord> dets;
    std::size_t line_no = 0;
    for (const auto& parts : split_fields(text)) {
        ++line_no;
        if (parts.empty()) continue;
        if (parts.size() != 7) {
            throw ParseError("detections line " + std::to_string(line_no) +
                             ": expected 7 fields, got " + std::to_string(parts.size()));
        }
        DetectionRecord d;
        d.image_id = parse_int(parts[0], line_no);
        d.class_index = parse_int(parts[1], line_no);
        d.box = parse_corners(parts, 2, line_no);
        d.confidence = parse_double(parts[6], line_no);
        dets.push_back(d);
    }
    return dets;
}

std::string format_ground_truth(std::span<const GroundTruthRecord> gts) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(6);
    for (const GroundTruthRecord& g : gts) {
        out << g.image_id << ' ' << g.class_index << ' ' << g.box.x1 << ' '
            << g.box.y1 << ' ' << g.box.x2 << ' ' << g.box.y2;
        if (g.pixel_area.has_value()) out << ' ' << *g.pixel_area;
        out << '\n';
    }
    return out.str();
}

std::vector<GroundTruthRecord> parse_ground_truth(const std::string& text) {
    std::vector<GroundTruthRecord> gts;
    std::size_t line_no = 0;
    for (const auto& parts : split_fields(text)) {
        ++line_no;
        if (parts.empty()) continue;
        if (parts.size() != 6 && parts.size() != 7) {
            throw ParseError("ground-truth line " + std::to_string(line_no) +
                             ": expected 6 or 7 fields, got " +
                             std::to_string(parts.size()));
        }
        GroundTruthRecord g;
        g.image_id = parse_int(parts[0], line_no);
        g.class_index = parse_int(parts[1], line_no);
        g.box = parse_corners(parts, 2, line_no);
        if (parts.size() == 7) {
            const double area = parse_double(parts[6], line_no);
            if (area < 0.0) {
                throw ValidationError("ground-truth line " + std::to_string(line_no) +
                                      ": negative pixel area");
            }
            g.pixel_area = area;
        }
        gts.push_back(g);
    }
    return gts;
}

namespace {

MaskImage read_text_mask(const std::string& content, const fs::path& path) {
    MaskImage mask;
    std::istringstream stream(content);
    std::string line;
    while (std::getline(stream, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
            line.pop_back();
        }
        if (line.empty()) continue;
        if (mask.width == 0) {
            mask.width = line.size();
        } else if (line.size() != mask.width) {
            throw ParseError("ragged text mask: " + path.string());
        }
        for (char ch : line) {
            if (ch != '0' && ch != '1') {
                throw ParseError("text mask must be 0/1: " + path.string());
            }
            mask.data.push_back(ch == '1' ? 1 : 0);
        }
        ++mask.height;
    }
    if (mask.height == 0) throw ParseError("empty mask file: " + path.string());
    return mask;
}

MaskImage read_pgm_mask(const std::string& content, const fs::path& path) {
    std::istringstream stream(content);
    std::string magic;
    stream >> magic;
    if (magic != "P2" && magic != "P5") {
        throw ParseError("unsupported mask format (want P2/P5 PGM or .txt): " +
                         path.string());
    }
    auto next_token = [&]() -> long {
        // Skip whitespace and `#` comments between header tokens.
        while (true) {
            const int c = stream.peek();
            if (c == '#') {
                std::string comment;
                std::getline(stream, comment);
            } else if (std::isspace(c)) {
                stream.get();
            } else {
                break;
            }
        }
        long value = -1;
        stream >> value;
        if (!stream) throw ParseError("bad PGM header: " + path.string());
        return value;
    };
    const long width = next_token();
    const long height = next_token();
    const long maxval = next_token();
    if (width < 1 || height < 1 || maxval < 1 || maxval > 65535) {
        throw ParseError("bad PGM dimensions: " + path.string());
    }

    MaskImage mask;
    mask.width = static_cast<std::size_t>(width);
    mask.height = static_cast<std::size_t>(height);
    mask.data.reserve(mask.width * mask.height);
    const long threshold = maxval / 2;

    if (magic == "P2") {
        for (long i = 0; i < width * height; ++i) {
            long v = 0;
            stream >> v;
            if (!stream) throw ParseError("truncated P2 payload: " + path.string());
            mask.data.push_back(v > threshold ? 1 : 0);
        }
    } else {
        stream.get();  // single whitespace after maxval
        const int bytes_per = maxval > 255 ? 2 : 1;
        std::vector<char> raw(static_cast<std::size_t>(width * height * bytes_per));
        stream.read(raw.data(), static_cast<std::streamsize>(raw.size()));
        if (stream.gcount() != static_cast<std::streamsize>(raw.size())) {
            throw ParseError("truncated P5 payload: " + path.string());
        }
        for (long i = 0; i < width * height; ++i) {
            long v;
            if (bytes_per == 1) {
                v = static_cast<unsigned char>(raw[static_cast<std::size_t>(i)]);
            } else {
                const auto hi = static_cast<unsigned char>(raw[static_cast<std::size_t>(2 * i)]);
                const auto lo = static_cast<unsigned char>(raw[static_cast<std::size_t>(2 * i + 1)]);
                v = (long(hi) << 8) | lo;
            }
            mask.data.push_back(v > threshold ? 1 : 0);
        }
    }
    return mask;
}

}  // namespace

MaskImage read_mask(const fs::path& path) {
    const std::string content = read_file(path);
    if (path.extension() == ".txt") return read_text_mask(content, path);
    return read_pgm_mask(content, path);
}

std::vector<std::string> read_lines(const fs::path& path) {
    const std::string content = read_file(path);
    std::vector<std::string> lines;
    std::istringstream stream(content);
    std::string line;
    while (std::getline(stream, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

std::set<std::string> read_word_set(const fs::path& path) {
    std::set<std::string> words;
    for (const std::string& line : read_lines(path)) {
        std::istringstream fields(line);
        std::string word;
        while (fields >> word) words.insert(word);
    }
    return words;
}

void write_vocabulary(const fs::path& path, const ClassVocabulary& vocab) {
    std::string out;
    for (const std::string& name : vocab.names) {
        out += name;
        out += '\n';
    }
    write_file_atomic(path, out);
}

void write_novel_ids(const fs::path& path, const ClassVocabulary& vocab) {
    std::string out;
    for (std::size_t i = 0; i < vocab.novel.size(); ++i) {
        if (vocab.novel[i]) {
            out += std::to_string(i);
            out += '\n';
        }
    }
    write_file_atomic(path, out);
}

std::vector<int> read_novel_ids(const fs::path& path) {
    std::vector<int> ids;
    std::size_t line_no = 0;
    for (const std::string& line : read_lines(path)) {
        ++line_no;
        if (line.empty()) continue;
        ids.push_back(parse_int(line, line_no));
    }
    return ids;
}

std::string format_terms(const ClassTerms& terms) {
    std::string out;
    for (const auto& [term, freq] : terms.terms) {
        out += term;
        out += '\t';
        out += std::to_string(freq);
        out += '\n';
    }
    return out;
}

}  // namespace camokit::io
