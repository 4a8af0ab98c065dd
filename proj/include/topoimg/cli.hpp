#ifndef TOPOIMG_CLI_HPP
#define TOPOIMG_CLI_HPP

namespace topoimg {

// Batch front end. Exit codes: 0 success, 2 usage/input error, 3 numerical
// failure. Every run writes <prefix>.meta.json with the resolved config and
// checksums of the artifacts it produced.
int run_cli(int argc, const char* const* argv);

}  // namespace topoimg

#endif
