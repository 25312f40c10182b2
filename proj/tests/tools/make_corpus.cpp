// SPDX-License-Identifier: Apache-2.0
// Regenerates data/corpus from data/scripts.
#include "corpus_gen.hpp"

#include <iostream>

int main()
{
    namespace fs = std::filesystem;
    auto dir = safepdf::test::corpus_dir();
    fs::create_directories(dir);
    for (auto const& item : fs::directory_iterator(dir))
        if (item.path().extension() == ".pdf")
            fs::remove(item.path());
    auto files = safepdf::test::build_corpus();
    for (auto const& f : files) {
        std::ofstream os(dir / f.name, std::ios::binary);
        os << f.bytes;
    }
    std::ofstream(dir / "labels.txt") << safepdf::test::corpus_labels(files);
    std::cout << files.size() << " files in " << dir.string() << "\n";
}
