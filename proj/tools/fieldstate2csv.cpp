// fieldstate2csv: lossy text exporter for binary field snapshots (.kfs).
// The binary container keeps full precision; this emits %.12g for plotting.
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "kerr/io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"export a binary field snapshot (.kfs) as CSV\n"
               "columns: u,costheta,re_psi1,im_psi1,re_psi2,im_psi2"};
  std::string input;
  std::string output;
  app.add_option("input", input, "snapshot file (.kfs)")->required();
  app.add_option("-o,--output", output, "output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const kerr::Snapshot s = kerr::read_snapshot(input);
    std::FILE* f = stdout;
    if (!output.empty()) {
      f = std::fopen(output.c_str(), "wb");
      if (!f) throw std::runtime_error("cannot open for writing: " + output);
    }
    const kerr::FieldState& st = s.state;
    std::fprintf(f, "# time = %.17g\n", st.time);
    std::fprintf(f, "# M = %.17g, a = %.17g, k = %d\n", s.bg.M, s.bg.a, s.bg.k);
    std::fprintf(f, "# nu = %zu, ncostheta = %zu\n", st.nu(), st.nc());
    std::fprintf(f, "u,costheta,re_psi1,im_psi1,re_psi2,im_psi2\n");
    for (std::size_t i = 0; i < st.nu(); ++i)
      for (std::size_t j = 0; j < st.nc(); ++j) {
        const std::size_t p = st.idx(i, j);
        std::fprintf(f, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", st.u_grid[i],
                     st.costheta_grid[j], st.psi1[p].real(), st.psi1[p].imag(),
                     st.psi2[p].real(), st.psi2[p].imag());
      }
    if (f != stdout) std::fclose(f);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
