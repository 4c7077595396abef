#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace prefixgan {

inline constexpr const char* kPadToken = "<pad>";
inline constexpr const char* kStartToken = "<s>";

/// Token inventory. Ids are dense: specials first, then content tokens in
/// first-occurrence order. The token<->id mapping is bijective.
struct Vocab {
  std::vector<std::string> tokens;
  int pad_id = 0;
  int start_id = 1;

  int size() const { return static_cast<int>(tokens.size()); }
  int id_of(const std::string& tok) const;
  const std::string& token_of(int id) const;
  bool contains(const std::string& tok) const { return index_.count(tok) > 0; }

  /// First-occurrence vocabulary over whitespace-tokenized lines, with the
  /// pad and start specials prepended. Errors if no line yields a token.
  static Vocab build(const std::vector<std::string>& lines);

  /// Specials plus content tokens "w0".."w{n-1}", for model-generated data.
  static Vocab synthetic(int content_count);

  /// One token per line; the line number is the id.
  void save(const std::filesystem::path& file) const;
  static Vocab load(const std::filesystem::path& file);

  void rebuild_index();

 private:
  std::unordered_map<std::string, int> index_;
};

/// Fixed-length id sequence: ids[k] == pad for k >= true_len and != pad below.
struct Sequence {
  std::vector<int> ids;
  int true_len = 0;

  int max_len() const { return static_cast<int>(ids.size()); }
};

Sequence make_sequence(const std::vector<int>& token_ids, int t_max, int pad_id);

struct Corpus {
  std::vector<Sequence> sequences;
  int T = 0;      // shared max length
  int t_ave = 0;  // segment point candidate

  std::size_t size() const { return sequences.size(); }
};

/// The two evaluation cut points: t_mid < t_full == T.
struct SegmentPlan {
  int t_mid = 0;
  int t_full = 0;
};

/// Whitespace tokenization, case preserved.
std::vector<std::string> tokenize(const std::string& line);

/// Encode lines into pad-filled sequences of shared length T. t_ave is the
/// round-half-up mean of true lengths clamped to [1, T]; when that collapses
/// onto T (fixed-length data) it falls back to floor(T/2) so two distinct
/// cut points always exist for T >= 2.
Corpus encode_corpus(const std::vector<std::string>& lines, const Vocab& vocab, int t_max);

/// Cut points for the two-segment scheme. Errors when T == 1 (no nontrivial
/// segmentation exists).
SegmentPlan segment_plan(const Corpus& corpus);

std::vector<std::string> decode(const Sequence& seq, const Vocab& vocab);

/// Plain text corpus file: one sentence per line, single-space delimited.
std::vector<std::string> read_lines(const std::filesystem::path& file);
void write_lines(const std::filesystem::path& file, const std::vector<std::string>& lines);

}  // namespace prefixgan
