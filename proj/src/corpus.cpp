#include "prefixgan/corpus.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace prefixgan {

namespace {

int fallback_mid(int t_max) { return t_max / 2; }

}  // namespace

int Vocab::id_of(const std::string& tok) const {
  auto it = index_.find(tok);
  if (it == index_.end()) throw std::out_of_range("Vocab: unknown token '" + tok + "'");
  return it->second;
}

const std::string& Vocab::token_of(int id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("Vocab: id out of range");
  return tokens[id];
}

void Vocab::rebuild_index() {
  index_.clear();
  for (int i = 0; i < size(); ++i) {
    if (!index_.emplace(tokens[i], i).second)
      throw std::invalid_argument("Vocab: duplicate token '" + tokens[i] + "'");
  }
}

Vocab Vocab::build(const std::vector<std::string>& lines) {
  Vocab v;
  v.tokens = {kPadToken, kStartToken};
  v.pad_id = 0;
  v.start_id = 1;
  v.rebuild_index();
  bool any = false;
  for (const auto& line : lines) {
    for (const auto& tok : tokenize(line)) {
      any = true;
      if (!v.index_.count(tok)) {
        v.index_.emplace(tok, v.size());
        v.tokens.push_back(tok);
      }
    }
  }
  if (!any) throw std::invalid_argument("Vocab::build: no tokens in input");
  return v;
}

Vocab Vocab::synthetic(int content_count) {
  if (content_count < 1) throw std::invalid_argument("Vocab::synthetic: need >= 1 token");
  Vocab v;
  v.tokens = {kPadToken, kStartToken};
  v.pad_id = 0;
  v.start_id = 1;
  v.tokens.reserve(content_count + 2);
  for (int i = 0; i < content_count; ++i) v.tokens.push_back("w" + std::to_string(i));
  v.rebuild_index();
  return v;
}

void Vocab::save(const std::filesystem::path& file) const {
  std::ofstream os(file);
  if (!os) throw std::runtime_error("Vocab::save: cannot open " + file.string());
  for (const auto& tok : tokens) os << tok << "\n";
}

Vocab Vocab::load(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw std::runtime_error("Vocab::load: cannot open " + file.string());
  Vocab v;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    v.tokens.push_back(line);
  }
  if (v.size() < 2) throw std::runtime_error("Vocab::load: fewer than two entries");
  if (v.tokens[0] != kPadToken || v.tokens[1] != kStartToken)
    throw std::runtime_error("Vocab::load: missing special tokens");
  v.pad_id = 0;
  v.start_id = 1;
  v.rebuild_index();
  return v;
}

Sequence make_sequence(const std::vector<int>& token_ids, int t_max, int pad_id) {
  if (static_cast<int>(token_ids.size()) > t_max)
    throw std::invalid_argument("make_sequence: too many tokens for T");
  Sequence s;
  s.ids.assign(t_max, pad_id);
  for (std::size_t k = 0; k < token_ids.size(); ++k) {
    if (token_ids[k] == pad_id)
      throw std::invalid_argument("make_sequence: pad id inside content");
    s.ids[k] = token_ids[k];
  }
  s.true_len = static_cast<int>(token_ids.size());
  return s;
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

Corpus encode_corpus(const std::vector<std::string>& lines, const Vocab& vocab, int t_max) {
  if (t_max < 1) throw std::invalid_argument("encode_corpus: T must be >= 1");
  Corpus c;
  c.T = t_max;
  c.sequences.reserve(lines.size());
  double len_sum = 0.0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto toks = tokenize(lines[i]);
    if (toks.empty()) continue;
    if (static_cast<int>(toks.size()) > t_max)
      throw std::invalid_argument("encode_corpus: line " + std::to_string(i) +
                                  " has " + std::to_string(toks.size()) +
                                  " tokens, exceeding T=" + std::to_string(t_max));
    std::vector<int> ids;
    ids.reserve(toks.size());
    for (const auto& tok : toks) ids.push_back(vocab.id_of(tok));
    c.sequences.push_back(make_sequence(ids, t_max, vocab.pad_id));
    len_sum += static_cast<double>(toks.size());
  }
  if (c.sequences.empty()) throw std::invalid_argument("encode_corpus: no non-empty lines");
  // Round-half-up mean length, clamped; fixed-length data degenerates onto T
  // and falls back so the plan keeps two distinct cuts.
  int t_ave = static_cast<int>(std::floor(len_sum / static_cast<double>(c.sequences.size()) + 0.5));
  t_ave = std::max(1, std::min(t_ave, t_max));
  if (t_ave == t_max && t_max >= 2) t_ave = fallback_mid(t_max);
  c.t_ave = t_ave;
  return c;
}

SegmentPlan segment_plan(const Corpus& corpus) {
  if (corpus.T <= 1)
    throw std::invalid_argument("segment_plan: T must be >= 2 for two distinct cuts");
  int mid = corpus.t_ave;
  if (mid >= corpus.T) mid = fallback_mid(corpus.T);
  if (mid < 1) mid = 1;
  return SegmentPlan{mid, corpus.T};
}

std::vector<std::string> decode(const Sequence& seq, const Vocab& vocab) {
  std::vector<std::string> out;
  out.reserve(seq.true_len);
  for (int k = 0; k < seq.true_len; ++k) out.push_back(vocab.token_of(seq.ids[k]));
  return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw std::runtime_error("read_lines: cannot open " + file.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void write_lines(const std::filesystem::path& file, const std::vector<std::string>& lines) {
  std::ofstream os(file);
  if (!os) throw std::runtime_error("write_lines: cannot open " + file.string());
  for (const auto& line : lines) os << line << "\n";
}

}  // namespace prefixgan
