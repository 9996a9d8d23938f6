#include <malloc.h>

#include <iostream>

#include "heteroflow_cli/app.hpp"

int main(int argc, char** argv) {
  // Training allocates and frees many mid-sized temporaries; keeping them off
  // mmap and skipping heap trimming avoids most of the page-fault churn.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  return heteroflow::cli::run(argc, argv, std::cout, std::cerr);
}
