#pragma once

#include "semshift/alignment.hpp"
#include "semshift/classifier.hpp"
#include "semshift/detection.hpp"
#include "semshift/embedding_store.hpp"
#include "semshift/errors.hpp"
#include "semshift/evaluation.hpp"
#include "semshift/io.hpp"
#include "semshift/pipeline.hpp"
#include "semshift/sampling.hpp"
#include "semshift/synthetic.hpp"
