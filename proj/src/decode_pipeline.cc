#include "fnmt/decode_pipeline.h"

#include <algorithm>

#include "fnmt/error.h"

namespace fnmt {

namespace {

bool any_marked(const Tokens& tokens) {
  return std::any_of(tokens.begin(), tokens.end(), [](const auto& t) { return has_word_boundary(t); });
}

}  // namespace

std::string render_plain(const Tokens& tokens) {
  const auto joined = join_tokens(tokens);
  return any_marked(tokens) ? detokenize_marked(joined) : joined;
}

std::string render_casing(std::span<const CasedToken> tokens) {
  Tokens out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(apply_casing(t.lemma, t.factor));
  return render_plain(out);
}

std::string render_segmentation(std::span<const SegmentedToken> tokens) {
  return decode_segmentation(tokens);
}

OsnmtRendering render_osnmt(const std::vector<std::vector<osm::FactoredOp>>& ranked, std::size_t src_len) {
  auto finish = [](osm::Compiled c) { return any_marked(c.target) ? osm::join_subwords(c) : c; };
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    try {
      const auto ops = osm::defactor(ranked[r]);
      return {finish(osm::interpret(ops, src_len)), r, false};
    } catch (const Error&) {
      continue;
    }
  }
  OsnmtRendering fallback;
  fallback.flagged = true;
  if (!ranked.empty()) {
    for (const auto& p : ranked.front())
      if (p.lemma != osm::kEndOfSequence && !osm::is_reserved_name(p.lemma)) fallback.compiled.target.push_back(p.lemma);
    if (any_marked(fallback.compiled.target)) {
      osm::Compiled joined;
      for (const auto& t : fallback.compiled.target) {
        const auto piece = encode_segmentation(t);
        if (piece.factor.separated || joined.target.empty()) joined.target.push_back(piece.lemma);
        else joined.target.back() += piece.lemma;
      }
      fallback.compiled = std::move(joined);
    }
  }
  return fallback;
}

Decoder::Decoder(ModelBundle bundle)
    : bundle_(std::move(bundle)), model_(bundle_.config, bundle_.params) {
  if (bundle_.config.factor_vocab != factor_vocab_size(bundle_.application))
    throw InvalidInput("model factor vocabulary does not match its application");
}

std::vector<DecodedSentence> Decoder::decode(std::string_view source_line, const search::SearchConfig& config,
                                             std::size_t nbest) const {
  const auto tokens = split_tokens(source_line);
  if (tokens.empty()) throw InvalidInput("cannot decode an empty source sentence");
  const auto ids = bundle_.source_vocab.encode(tokens);
  search::ModelScorer<float> scorer(model_, ids);
  const auto result = search::beam_search_factored(scorer, config);
  return render(result.hypotheses, tokens.size(), nbest);
}

std::vector<DecodedSentence> Decoder::render(const std::vector<search::Hypothesis>& hyps, std::size_t src_len,
                                             std::size_t nbest) const {
  const auto& vocab = bundle_.target_vocab;
  std::vector<DecodedSentence> out;
  auto body = [](const search::Hypothesis& h) {
    auto n = h.tokens.size();
    if (h.finished && n > 0) --n;
    return std::span<const search::FactorIds>(h.tokens.data(), n);
  };

  if (bundle_.application == Application::kOsnmt) {
    std::vector<std::vector<osm::FactoredOp>> ranked;
    for (const auto& h : hyps) {
      std::vector<osm::FactoredOp> pairs;
      for (const auto& t : h.tokens) pairs.push_back({vocab.token(t.y1), {t.y2}});
      ranked.push_back(std::move(pairs));
    }
    std::vector<std::vector<osm::FactoredOp>> remaining = ranked;
    std::size_t offset = 0;
    while (out.size() < std::max<std::size_t>(nbest, 1) && !remaining.empty()) {
      const auto r = render_osnmt(remaining, src_len);
      if (r.flagged) {
        if (out.empty()) {
          DecodedSentence d;
          d.text = join_tokens(r.compiled.target);
          d.flagged = true;
          if (!hyps.empty()) {
            d.score = hyps.front().score;
            d.steps = hyps.front().tokens.size();
          }
          out.push_back(std::move(d));
        }
        break;
      }
      const auto& h = hyps[offset + r.rank];
      DecodedSentence d;
      d.text = join_tokens(r.compiled.target);
      d.alignment = r.compiled.alignment;
      d.score = h.score;
      d.steps = h.tokens.size();
      out.push_back(std::move(d));
      offset += r.rank + 1;
      remaining.erase(remaining.begin(), remaining.begin() + static_cast<std::ptrdiff_t>(r.rank + 1));
    }
    return out;
  }

  for (std::size_t k = 0; k < hyps.size() && k < std::max<std::size_t>(nbest, 1); ++k) {
    const auto& h = hyps[k];
    DecodedSentence d;
    d.score = h.score;
    d.steps = h.tokens.size();
    const auto toks = body(h);
    switch (bundle_.application) {
      case Application::kCasing: {
        std::vector<CasedToken> cased;
        for (const auto& t : toks) cased.push_back({vocab.token(t.y1), static_cast<CasingClass>(t.y2)});
        d.text = render_casing(cased);
        break;
      }
      case Application::kSegmentation: {
        std::vector<SegmentedToken> segs;
        for (const auto& t : toks) segs.push_back({vocab.token(t.y1), {t.y2 == 1}});
        d.text = render_segmentation(segs);
        break;
      }
      default: {
        Tokens plain;
        for (const auto& t : toks) plain.push_back(vocab.token(t.y1));
        d.text = render_plain(plain);
      }
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace fnmt
