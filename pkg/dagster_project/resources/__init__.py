"""Shared workspace resource: where runs live and how models are trained."""

from pathlib import Path
from typing import Optional

from dagster import ConfigurableResource

from pgrec import settings
from pgrec.data.config import DatasetConfig
from pgrec.data.loader import load_data_dir, read_dataset_conf
from pgrec.data.synthetic import SyntheticConfig
from pgrec.training import TrainConfig


class PgrecWorkspace(ConfigurableResource):
    root_dir: str = "runs/dagster"
    seed: int = 0
    model_kind: str = "pgusa"
    beta: float = 5.0
    epochs: int = 30
    learning_rate: Optional[float] = None
    threads: int = 1
    n_users: int = 500
    n_items: int = 300
    n_groups: int = 8
    events_per_group: int = 150

    @property
    def data_dir(self) -> Path:
        return Path(self.root_dir) / "data"

    @property
    def model_dir(self) -> Path:
        return Path(self.root_dir) / "model"

    @property
    def analysis_dir(self) -> Path:
        return Path(self.root_dir) / "analysis"

    def synthetic_config(self) -> SyntheticConfig:
        return SyntheticConfig(
            n_users=self.n_users,
            n_items=self.n_items,
            n_groups=self.n_groups,
            group_size_min=min(20, self.n_users),
            group_size_max=min(60, self.n_users),
            events_per_group=self.events_per_group,
        )

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            beta=self.beta,
            epochs=self.epochs,
            learning_rate=self.learning_rate,
            seed=self.seed,
            threads=self.threads,
        )

    def load_dataset(self):
        """Split with the workspace seed unless dataset.conf pins ``split_seed``."""
        conf = read_dataset_conf(self.data_dir)
        config = settings.build_config(DatasetConfig, {"split_seed": self.seed}, conf)
        return load_data_dir(self.data_dir, config)
