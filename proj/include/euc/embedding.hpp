#pragma once

#include <Eigen/Dense>
#include <memory>
#include <stdexcept>
#include <string>

#include "euc/model.hpp"

namespace euc {

// Cosine similarity; a zero-norm side yields 0.0 by convention.
inline double cosine_sim(const Eigen::Ref<const Eigen::VectorXd>& u,
                         const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (u.size() != v.size())
    throw std::invalid_argument("cosine_sim: dimension mismatch (" +
                                std::to_string(u.size()) + " vs " +
                                std::to_string(v.size()) + ")");
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return u.dot(v) / (nu * nv);
}

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual int dimension() const = 0;
  // Deterministic vector for a text; empty text maps to the zero vector.
  virtual Eigen::VectorXd embed(const std::string& text) const = 0;
};

// Seedless character-trigram hashing embedder. The text is lowercased and
// whitespace-collapsed, every 3-char window is FNV-1a hashed into one of
// `dim` buckets, and the count vector is L2-normalized. Texts shorter than
// one window hash as a single token, so equal texts always embed equal and
// "a" still gets a nonzero vector.
class HashNgramEmbedder : public EmbeddingProvider {
 public:
  explicit HashNgramEmbedder(int dim = 64);
  int dimension() const override { return dim_; }
  Eigen::VectorXd embed(const std::string& text) const override;

 private:
  int dim_;
};

enum class ProviderKind { hash_ngram, precomputed };

ProviderKind provider_kind_from_string(const std::string& name);
std::string_view to_string(ProviderKind kind);

// Run-level embedding access. In precomputed mode element vectors come from
// the input files and only texts without a stored vector (role anchors,
// questions, concatenated chunk text) fall back to hashing at the same
// dimension; in hash-ngram mode everything is hashed.
class Embeddings {
 public:
  Embeddings(ProviderKind kind, int dim);

  ProviderKind kind() const { return kind_; }
  int dimension() const { return hasher_.dimension(); }

  Eigen::VectorXd for_text(const std::string& text) const;
  Eigen::VectorXd for_element(const LayoutElement& element) const;
  // Chunk vector for a set of members: in precomputed mode the normalized
  // mean of stored member vectors when any exist, otherwise a hash of the
  // concatenated text.
  Eigen::VectorXd for_members(const std::vector<const LayoutElement*>& members,
                              const std::string& joined_text) const;

 private:
  ProviderKind kind_;
  HashNgramEmbedder hasher_;
};

}  // namespace euc
