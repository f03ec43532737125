#ifndef PHONOSIM_H
#define PHONOSIM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PhonosimStatus {
  PHONOSIM_STATUS_OK = 0,
  PHONOSIM_STATUS_NULL_ARGUMENT = 1,
  PHONOSIM_STATUS_INVALID_UTF8 = 2,
  PHONOSIM_STATUS_IO = 3,
  PHONOSIM_STATUS_PARSE = 4,
  PHONOSIM_STATUS_UNKNOWN_WORD = 5,
  PHONOSIM_STATUS_UNKNOWN_PHONEME = 6,
  PHONOSIM_STATUS_INVALID_CONFIG = 7,
  PHONOSIM_STATUS_DIVERGED = 8,
  PHONOSIM_STATUS_ZERO_VECTOR = 9,
  PHONOSIM_STATUS_BUFFER_TOO_SMALL = 10,
  PHONOSIM_STATUS_INTERNAL = 11,
} PhonosimStatus;

typedef struct PhonosimEmbedding PhonosimEmbedding;

// A pronunciation dictionary together with its phoneme inventory.
typedef struct PhonosimLexicon PhonosimLexicon;

// Similarity settings. `bigram = false` ignores `vowel_weighted`.
typedef struct PhonosimSimilarityConfig {
  bool bigram;
  bool vowel_weighted;
  double penalty;
} PhonosimSimilarityConfig;

typedef struct PhonosimTrainConfig {
  uintptr_t dim;
  uintptr_t epochs;
  uintptr_t pairs_per_word;
  uintptr_t batch_size;
  double learning_rate;
  double final_learning_rate;
  double self_pair_fraction;
  uint64_t seed;
} PhonosimTrainConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or an empty string.
// Valid until the next call into this library on the same thread.
const char *phonosim_last_error(void);

struct PhonosimSimilarityConfig phonosim_similarity_config_default(void);

struct PhonosimTrainConfig phonosim_train_config_default(void);

// Loads the bundled dictionary for `language` (`"en"` or `"hi"`).
//
// # Safety
// `language` must be a NUL-terminated string and `out` a writable pointer.
enum PhonosimStatus phonosim_lexicon_load_language(const char *language,
                                                   struct PhonosimLexicon **out);

// Loads a feature table and a dictionary from disk. `cmu_layout` selects the
// CMU dictionary layout; otherwise one `word<TAB>phones` entry per line.
//
// # Safety
// String arguments must be NUL-terminated and `out` a writable pointer.
enum PhonosimStatus phonosim_lexicon_load(const char *feature_table,
                                          const char *dictionary,
                                          const char *language,
                                          bool cmu_layout,
                                          struct PhonosimLexicon **out);

// # Safety
// `lexicon` must come from a `phonosim_lexicon_load*` call, or be null.
void phonosim_lexicon_free(struct PhonosimLexicon *lexicon);

// Number of headwords, or 0 for a null handle.
//
// # Safety
// `lexicon` must be a live handle or null.
uintptr_t phonosim_lexicon_len(const struct PhonosimLexicon *lexicon);

// Similarity of the first pronunciations of two headwords.
//
// # Safety
// Handles and strings must be valid; `out` must be writable.
enum PhonosimStatus phonosim_word_similarity(const struct PhonosimLexicon *lexicon,
                                             const char *a,
                                             const char *b,
                                             const struct PhonosimSimilarityConfig *config,
                                             double *out);

// Similarity of two space-separated phoneme strings, e.g. `"K AE1 T"`.
// Stress digits are dropped from symbols the inventory does not know.
//
// # Safety
// Handles and strings must be valid; `out` must be writable.
enum PhonosimStatus phonosim_phones_similarity(const struct PhonosimLexicon *lexicon,
                                               const char *a,
                                               const char *b,
                                               const struct PhonosimSimilarityConfig *config,
                                               double *out);

// Trains an embedding over every headword of `lexicon`.
//
// # Safety
// Handles and config pointers must be valid; `out` must be writable.
enum PhonosimStatus phonosim_embedding_train(const struct PhonosimLexicon *lexicon,
                                             const struct PhonosimSimilarityConfig *similarity,
                                             const struct PhonosimTrainConfig *train,
                                             struct PhonosimEmbedding **out);

// # Safety
// `path` must be NUL-terminated and `out` writable.
enum PhonosimStatus phonosim_embedding_load(const char *path, struct PhonosimEmbedding **out);

// # Safety
// `embedding` must be a live handle; `path` must be NUL-terminated.
enum PhonosimStatus phonosim_embedding_save(const struct PhonosimEmbedding *embedding,
                                            const char *path);

// # Safety
// `embedding` must come from this library, or be null.
void phonosim_embedding_free(struct PhonosimEmbedding *embedding);

// # Safety
// `embedding` must be a live handle or null.
uintptr_t phonosim_embedding_len(const struct PhonosimEmbedding *embedding);

// # Safety
// `embedding` must be a live handle or null.
uintptr_t phonosim_embedding_dim(const struct PhonosimEmbedding *embedding);

// Copies the vector of `word` into `buffer`, which holds `capacity` doubles.
// Fails with `BUFFER_TOO_SMALL` when `capacity` is below the dimension.
//
// # Safety
// `buffer` must be writable for `capacity` doubles.
enum PhonosimStatus phonosim_embedding_vector(const struct PhonosimEmbedding *embedding,
                                              const char *word,
                                              double *buffer,
                                              uintptr_t capacity);

// # Safety
// Handles and strings must be valid; `out` must be writable.
enum PhonosimStatus phonosim_embedding_cosine(const struct PhonosimEmbedding *embedding,
                                              const char *a,
                                              const char *b,
                                              double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHONOSIM_H */
