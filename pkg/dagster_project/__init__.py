import os

from dagster import Definitions
from dotenv import load_dotenv

from .assets import (
    evaluation_report,
    gmv_report,
    influence_analysis,
    synthetic_dataset,
    trained_model,
)
from .resources import PgrecWorkspace

load_dotenv()

defs = Definitions(
    assets=[synthetic_dataset, trained_model, evaluation_report, influence_analysis, gmv_report],
    resources={
        "pgrec": PgrecWorkspace(
            root_dir=os.getenv("PGREC_OUT_DIR", "runs/dagster"),
            seed=int(os.getenv("PGREC_SEED", "0")),
            threads=int(os.getenv("PGREC_THREADS", "1")),
        ),
    },
)
