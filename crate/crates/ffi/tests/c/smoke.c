#include <stdio.h>
#include "phonosim.h"

int main(void) {
    PhonosimLexicon *lex = NULL;
    if (phonosim_lexicon_load_language("en", &lex) != PHONOSIM_STATUS_OK) {
        fprintf(stderr, "load: %s\n", phonosim_last_error());
        return 1;
    }
    PhonosimSimilarityConfig cfg = phonosim_similarity_config_default();
    double s = 0.0;
    if (phonosim_word_similarity(lex, "sinking", "thinking", &cfg, &s) != PHONOSIM_STATUS_OK) {
        return 2;
    }
    if (phonosim_word_similarity(lex, "sinking", "qzxqzx", &cfg, &s) != PHONOSIM_STATUS_UNKNOWN_WORD) {
        return 3;
    }
    printf("%.6f\n", s);
    phonosim_lexicon_free(lex);
    return 0;
}
