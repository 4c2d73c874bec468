#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "camokit/alignment.hpp"

namespace camokit {

/// Binary foreground mask; a pixel at (row, col) covers the unit square
/// [col, col+1] x [row, row+1] in pixel space.
struct MaskImage {
    std::size_t height = 0, width = 0;
    std::vector<std::uint8_t> data;  // 0 background, 1 foreground

    bool at(std::size_t row, std::size_t col) const {
        return data[row * width + col] != 0;
    }
};

struct LabelRecord {
    int class_index = 0;
    BBox box;
};

struct ClassVocabulary {
    std::vector<std::string> names;  // canonical, line index == class id
    std::vector<bool> novel;         // same length; false == base class
};

/// Tight normalized box over the foreground, clamped to the unit square.
BBox mask_to_bbox(const MaskImage& mask);

/// One line per record: `class cx cy w h`, 6-decimal fixed point.
std::string write_yolo_txt(std::span<const LabelRecord> records);

/// Parses the format above; malformed lines report their line number and
/// out-of-range values name the offending field.
std::vector<LabelRecord> read_yolo_txt(const std::string& text);

/// Lowercase, trim, drop whole-word modifiers, collapse internal whitespace.
std::string canonicalize_label(const std::string& raw,
                               std::span<const std::string> modifiers);

struct UnifyResult {
    ClassVocabulary vocab;
    std::vector<int> mapping;  // raw name index -> class id
};

/// Merges raw names whose canonical forms coincide; ids follow first-seen order.
UnifyResult unify_labels(std::span<const std::string> raw_names,
                         std::span<const std::string> modifiers);

struct ClassTerms {
    std::string class_name;
    std::vector<std::pair<std::string, int>> terms;  // freq desc, term asc
    bool empty_warning = false;
};

struct TermRepository {
    std::vector<ClassTerms> classes;
};

/// Per-class descriptions, one entry per class in a caller-fixed order.
using ClassDescriptions = std::vector<std::pair<std::string, std::vector<std::string>>>;

const std::set<std::string>& default_stopwords();

/// Tokenize on non-alphabetic boundaries, lowercase, drop stop words and
/// one-letter tokens, keep the 30 most frequent terms per class.
TermRepository build_term_repository(const ClassDescriptions& descriptions,
                                     const std::set<std::string>& stopwords);

/// Deterministic phrase list: class name (singular + naive plural) combined
/// with the top term pairs, then single terms, until `min_count` phrases or
/// the vocabulary runs out.
std::vector<std::string> assemble_phrases(const ClassTerms& terms,
                                          const std::string& class_name,
                                          std::size_t min_count = 20);

struct TextQualityStats {
    double lexical_diversity = 0.0;   // unique / total tokens over the corpus
    double avg_tokens = 0.0;          // mean tokens per sentence
    double unique_words = 0.0;        // distinct tokens over the corpus
    double avg_unique_ratio = 0.0;    // mean per-sentence unique/total
    double sentence_length_std = 0.0; // population std of sentence token counts
};

TextQualityStats text_quality_stats(std::span<const std::string> sentences);

enum class DifficultyLevel { Mild, Moderate, Severe };

struct DifficultyRecord {
    double score = 0.0;
    DifficultyLevel level = DifficultyLevel::Mild;
};

/// 0.6 * similarity + 0.4 * (1 - area_bbox/area_img), clamped to [0, 1].
double difficulty_score(double similarity, double area_bbox, double area_img);

/// Tercile split; boundary scores fall into the lower level.
std::vector<DifficultyLevel> split_by_terciles(std::span<const double> scores);

const char* difficulty_level_name(DifficultyLevel level);

}  // namespace camokit
