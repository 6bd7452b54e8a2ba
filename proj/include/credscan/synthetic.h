#pragma once

// Seeded generator of labeled credential lines shaped like real leaks: an
// assignment or config entry in one of several source languages, with a
// category-specific key name and a random value of the matching form.

#include <cstddef>
#include <cstdint>
#include <string>

#include "credscan/ingest.h"
#include "credscan/random.h"
#include "credscan/taxonomy.h"

namespace credscan {

// One synthetic line for `category`.
std::string synthetic_line(CredentialCategory category, Rng& rng);

// `per_category` true records for each of the eight categories, grouped by
// category id. source_path and language_tag are filled with plausible values.
LabeledDataset synthetic_dataset(std::size_t per_category, std::uint64_t seed);

}  // namespace credscan
