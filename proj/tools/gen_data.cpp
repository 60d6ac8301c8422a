// Regenerates the bundled datasets under data/. The files are committed, so
// running this is only needed after changing the generator parameters.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "cams/data_io.hpp"
#include "cams/synthetic.hpp"

namespace {

void write_with_names(const cams::Dataset& ds, const std::vector<std::string>& names,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw cams::ParseError(path + ": cannot open for writing");
  for (int i = 0; i < ds.num_samples(); ++i) {
    for (int j = 0; j < ds.num_features(); ++j)
      out << cams::detail::format_double(ds.features(i, j)) << ',';
    out << names[ds.labels[i]] << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "data";
  std::filesystem::create_directories(dir);

  const cams::Dataset agg = cams::make_aggregation_like();
  cams::save_dataset(agg, dir + "/aggregation.csv");
  std::cout << "aggregation.csv: n=" << agg.num_samples() << " d=" << agg.num_features()
            << " classes=" << agg.num_classes() << '\n';

  const cams::Dataset eco = cams::make_ecoli_like();
  write_with_names(eco, cams::ecoli_class_names(), dir + "/ecoli.csv");
  std::cout << "ecoli.csv: n=" << eco.num_samples() << " d=" << eco.num_features()
            << " classes=" << eco.num_classes() << '\n';
  return 0;
}
