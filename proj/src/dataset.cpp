#include "camokit/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

namespace camokit {

namespace {

std::vector<std::string> tokenize_alpha(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        if (std::isalpha(static_cast<unsigned char>(ch))) {
            current.push_back(
                static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

}  // namespace

BBox mask_to_bbox(const MaskImage& mask) {
    if (mask.height < 1 || mask.width < 1 ||
        mask.data.size() != mask.height * mask.width) {
        throw ValidationError("mask_to_bbox: malformed mask");
    }
    std::size_t min_row = mask.height, max_row = 0;
    std::size_t min_col = mask.width, max_col = 0;
    bool found = false;
    for (std::size_t r = 0; r < mask.height; ++r) {
        for (std::size_t c = 0; c < mask.width; ++c) {
            if (!mask.at(r, c)) continue;
            found = true;
            min_row = std::min(min_row, r);
            max_row = std::max(max_row, r);
            min_col = std::min(min_col, c);
            max_col = std::max(max_col, c);
        }
    }
    if (!found) throw DegenerateInputError("mask_to_bbox: empty mask");

    // Pixel-extent convention: pixel (r, c) spans [c, c+1] x [r, r+1], so a
    // full mask maps to exactly the unit box.
    BBox b;
    b.x1 = std::clamp(static_cast<double>(min_col) / mask.width, 0.0, 1.0);
    b.y1 = std::clamp(static_cast<double>(min_row) / mask.height, 0.0, 1.0);
    b.x2 = std::clamp(static_cast<double>(max_col + 1) / mask.width, 0.0, 1.0);
    b.y2 = std::clamp(static_cast<double>(max_row + 1) / mask.height, 0.0, 1.0);
    return b;
}

std::string write_yolo_txt(std::span<const LabelRecord> records) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(6);
    for (const LabelRecord& rec : records) {
        if (rec.class_index < 0) {
            throw ValidationError("yolo write: negative class index");
        }
        validate_box(rec.box, "yolo write");
        const auto [cx, cy, w, h] = rec.box.to_yolo();
        out << rec.class_index << ' ' << cx << ' ' << cy << ' ' << w << ' ' << h
            << '\n';
    }
    return out.str();
}

std::vector<LabelRecord> read_yolo_txt(const std::string& text) {
    std::vector<LabelRecord> records;
    std::istringstream stream(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        std::istringstream fields(line);
        std::vector<std::string> parts;
        std::string part;
        while (fields >> part) parts.push_back(part);
        if (parts.empty()) continue;  // blank line
        if (parts.size() != 5) {
            throw ParseError("yolo line " + std::to_string(line_no) + ": expected 5 fields, got " +
                             std::to_string(parts.size()));
        }
        int cls = 0;
        const auto cls_result =
            std::from_chars(parts[0].data(), parts[0].data() + parts[0].size(), cls);
        if (cls_result.ec != std::errc() ||
            cls_result.ptr != parts[0].data() + parts[0].size()) {
            throw ParseError("yolo line " + std::to_string(line_no) +
                             ": bad class index '" + parts[0] + "'");
        }
        if (cls < 0) {
            throw ValidationError("yolo line " + std::to_string(line_no) +
                                  ": field class is out of range");
        }
        static const char* kFieldNames[] = {"x_center", "y_center", "width", "height"};
        double vals[4];
        for (int i = 0; i < 4; ++i) {
            std::size_t consumed = 0;
            try {
                vals[i] = std::stod(parts[i + 1], &consumed);
            } catch (const std::exception&) {
                throw ParseError("yolo line " + std::to_string(line_no) + ": bad number '" +
                                 parts[i + 1] + "'");
            }
            if (consumed != parts[i + 1].size() || !std::isfinite(vals[i])) {
                throw ParseError("yolo line " + std::to_string(line_no) + ": bad number '" +
                                 parts[i + 1] + "'");
            }
            if (vals[i] < 0.0 || vals[i] > 1.0) {
                throw ValidationError("yolo line " + std::to_string(line_no) + ": field " +
                                      kFieldNames[i] + " is out of range");
            }
        }
        records.push_back(
            LabelRecord{cls, BBox::from_yolo(vals[0], vals[1], vals[2], vals[3])});
    }
    return records;
}

std::string canonicalize_label(const std::string& raw,
                               std::span<const std::string> modifiers) {
    std::vector<std::string> words;
    std::string current;
    auto flush = [&]() {
        if (current.empty()) return;
        const bool is_modifier =
            std::find(modifiers.begin(), modifiers.end(), current) != modifiers.end();
        if (!is_modifier) words.push_back(current);
        current.clear();
    };
    for (char ch : raw) {
        if (std::isspace(static_cast<unsigned char>(ch))) {
            flush();
        } else {
            current.push_back(
                static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        }
    }
    flush();

    std::string canonical;
    for (const std::string& w : words) {
        if (!canonical.empty()) canonical.push_back(' ');
        canonical += w;
    }
    return canonical;
}

UnifyResult unify_labels(std::span<const std::string> raw_names,
                         std::span<const std::string> modifiers) {
    if (raw_names.empty()) throw ValidationError("unify_labels: no names");
    UnifyResult result;
    std::unordered_map<std::string, int> ids;
    for (const std::string& raw : raw_names) {
        const std::string canonical = canonicalize_label(raw, modifiers);
        if (canonical.empty()) {
            throw ValidationError("unify_labels: '" + raw +
                                  "' canonicalizes to an empty name");
        }
        auto [it, inserted] =
            ids.emplace(canonical, static_cast<int>(result.vocab.names.size()));
        if (inserted) {
            result.vocab.names.push_back(canonical);
            result.vocab.novel.push_back(false);
        }
        result.mapping.push_back(it->second);
    }
    return result;
}

const std::set<std::string>& default_stopwords() {
    static const std::set<std::string> kStopwords = {
        "a",    "an",   "and",  "are",  "as",    "at",    "be",    "by",
        "for",  "from", "has",  "have", "in",    "is",    "it",    "its",
        "of",   "on",   "or",   "that", "the",   "their", "there", "these",
        "they", "this", "to",   "was",  "were",  "which", "while", "with",
        "within", "without"};
    return kStopwords;
}

TermRepository build_term_repository(const ClassDescriptions& descriptions,
                                     const std::set<std::string>& stopwords) {
    if (descriptions.empty()) {
        throw ValidationError("term repository: no classes");
    }
    TermRepository repo;
    for (const auto& [class_name, lines] : descriptions) {
        std::map<std::string, int> counts;  // ordered => lexicographic tie-break
        for (const std::string& line : lines) {
            for (std::string& token : tokenize_alpha(line)) {
                if (token.size() < 2) continue;
                if (stopwords.count(token)) continue;
                ++counts[std::move(token)];
            }
        }
        ClassTerms entry;
        entry.class_name = class_name;
        entry.terms.assign(counts.begin(), counts.end());
        std::stable_sort(entry.terms.begin(), entry.terms.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        if (entry.terms.size() > 30) entry.terms.resize(30);
        entry.empty_warning = entry.terms.empty();
        repo.classes.push_back(std::move(entry));
    }
    return repo;
}

std::vector<std::string> assemble_phrases(const ClassTerms& terms,
                                          const std::string& class_name,
                                          std::size_t min_count) {
    const std::string singular = class_name;
    const std::string plural =
        class_name.empty() || class_name.back() == 's' ? class_name
                                                       : class_name + "s";

    std::vector<std::string> phrases;
    auto add_both = [&](const std::string& prefix) {
        phrases.push_back(prefix + " " + singular);
        if (plural != singular) phrases.push_back(prefix + " " + plural);
    };

    // Top six pairs: all (i < j) combinations over the four leading terms.
    const std::size_t head = std::min<std::size_t>(terms.terms.size(), 4);
    for (std::size_t i = 0; i < head; ++i) {
        for (std::size_t j = i + 1; j < head; ++j) {
            add_both(terms.terms[i].first + " " + terms.terms[j].first);
        }
    }
    for (const auto& [term, freq] : terms.terms) {
        (void)freq;
        if (phrases.size() >= min_count) break;
        add_both(term);
    }
    return phrases;
}

TextQualityStats text_quality_stats(std::span<const std::string> sentences) {
    if (sentences.empty()) {
        throw ValidationError("text_quality_stats: no sentences");
    }
    std::set<std::string> corpus_unique;
    std::vector<double> lengths;
    double total_tokens = 0.0;
    double ratio_sum = 0.0;
    for (const std::string& sentence : sentences) {
        const std::vector<std::string> tokens = tokenize_alpha(sentence);
        if (tokens.empty()) continue;
        const std::set<std::string> unique(tokens.begin(), tokens.end());
        corpus_unique.insert(unique.begin(), unique.end());
        lengths.push_back(static_cast<double>(tokens.size()));
        total_tokens += static_cast<double>(tokens.size());
        ratio_sum += static_cast<double>(unique.size()) / tokens.size();
    }
    if (lengths.empty()) {
        throw ValidationError("text_quality_stats: no tokens in any sentence");
    }

    const double n = static_cast<double>(lengths.size());
    const double mean_len = total_tokens / n;
    double var = 0.0;
    for (double len : lengths) var += (len - mean_len) * (len - mean_len);
    var /= n;

    TextQualityStats stats;
    stats.lexical_diversity = static_cast<double>(corpus_unique.size()) / total_tokens;
    stats.avg_tokens = mean_len;
    stats.unique_words = static_cast<double>(corpus_unique.size());
    stats.avg_unique_ratio = ratio_sum / n;
    stats.sentence_length_std = std::sqrt(var);
    return stats;
}

double difficulty_score(double similarity, double area_bbox, double area_img) {
    if (!(area_bbox > 0.0) || !(area_bbox <= area_img)) {
        throw ValidationError("difficulty_score: need 0 < area_bbox <= area_img");
    }
    if (!std::isfinite(similarity)) {
        throw ValidationError("difficulty_score: non-finite similarity");
    }
    const double scale = 1.0 - area_bbox / area_img;
    return std::clamp(0.6 * similarity + 0.4 * scale, 0.0, 1.0);
}

std::vector<DifficultyLevel> split_by_terciles(std::span<const double> scores) {
    if (scores.size() < 3) {
        throw ValidationError("split_by_terciles: need at least three scores");
    }
    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double t1 = sorted[(n + 2) / 3 - 1];      // ceil(n/3)-th order statistic
    const double t2 = sorted[(2 * n + 2) / 3 - 1];  // ceil(2n/3)-th

    std::vector<DifficultyLevel> levels;
    levels.reserve(n);
    for (double s : scores) {
        if (s <= t1) {
            levels.push_back(DifficultyLevel::Mild);
        } else if (s <= t2) {
            levels.push_back(DifficultyLevel::Moderate);
        } else {
            levels.push_back(DifficultyLevel::Severe);
        }
    }
    return levels;
}

const char* difficulty_level_name(DifficultyLevel level) {
    switch (level) {
        case DifficultyLevel::Mild: return "mild";
        case DifficultyLevel::Moderate: return "moderate";
        case DifficultyLevel::Severe: return "severe";
    }
    return "unknown";
}

}  // namespace camokit
