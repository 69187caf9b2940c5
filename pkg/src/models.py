"""Pydantic models for corpus records, feature settings, training and evaluation."""

from datetime import datetime, timezone
from typing import Dict, List, Literal, Optional, Set

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

VIEW_NAMES = ("tfidf", "node2vec", "doc2vec", "timestamp")
SPLIT_NAMES = ("train", "validation", "test")

ViewName = Literal["tfidf", "node2vec", "doc2vec", "timestamp"]
SplitName = Literal["train", "validation", "test"]


def parse_utc(value: str) -> datetime:
    """Parse an ISO-8601 timestamp as UTC; naive values are taken as UTC."""
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    parsed = datetime.fromisoformat(text)
    if parsed.tzinfo is None:
        return parsed.replace(tzinfo=timezone.utc)
    return parsed.astimezone(timezone.utc)


class TweetRecord(BaseModel):
    """One raw tweet with its metadata."""

    user_id: str = Field(..., min_length=1, description="Author user id")
    text: str = Field(..., description="Raw UTF-8 tweet text")
    timestamp_utc: datetime = Field(..., description="Posting time in UTC")
    latitude: Optional[float] = Field(None, ge=-90, le=90, description="Degrees")
    longitude: Optional[float] = Field(None, ge=-180, le=180, description="Degrees")
    label: Optional[str] = Field(None, description="Class name")

    @field_validator('timestamp_utc', mode='before')
    @classmethod
    def validate_timestamp(cls, v):
        """Parse ISO-8601 strings as UTC."""
        if isinstance(v, str):
            return parse_utc(v)
        if isinstance(v, datetime):
            return v.replace(tzinfo=timezone.utc) if v.tzinfo is None else v.astimezone(timezone.utc)
        raise ValueError('timestamp_utc must be an ISO-8601 string')

    @model_validator(mode='after')
    def validate_coordinates(self):
        """Latitude and longitude come together or not at all."""
        if (self.latitude is None) != (self.longitude is None):
            raise ValueError('latitude and longitude must be both present or both absent')
        return self

    @property
    def hour(self) -> int:
        return self.timestamp_utc.hour

    @property
    def has_coordinates(self) -> bool:
        return self.latitude is not None


class UserDocument(BaseModel):
    """All tweets of one user, concatenated and preprocessed."""

    user_id: str
    tokens: List[str] = Field(default_factory=list)
    raw_texts: List[str] = Field(default_factory=list)
    hours: List[int] = Field(default_factory=list)
    gt_longitude: float = Field(..., ge=-180, le=180)
    gt_latitude: float = Field(..., ge=-90, le=90)
    gt_label: str
    split: SplitName

    @field_validator('hours')
    @classmethod
    def validate_hours(cls, v):
        """Hours of day are integers in [0, 23]."""
        for hour in v:
            if not 0 <= hour <= 23:
                raise ValueError(f'hour out of range: {hour}')
        return v


class SplitSpec(BaseModel):
    """Disjoint train/validation/test user id sets."""

    train_ids: Set[str] = Field(default_factory=set)
    validation_ids: Set[str] = Field(default_factory=set)
    test_ids: Set[str] = Field(default_factory=set)

    def overlaps(self) -> Set[str]:
        """User ids present in more than one split."""
        return (
            (self.train_ids & self.validation_ids)
            | (self.train_ids & self.test_ids)
            | (self.validation_ids & self.test_ids)
        )

    def all_ids(self) -> Set[str]:
        return self.train_ids | self.validation_ids | self.test_ids

    def split_of(self, user_id: str) -> Optional[SplitName]:
        if user_id in self.train_ids:
            return "train"
        if user_id in self.validation_ids:
            return "validation"
        if user_id in self.test_ids:
            return "test"
        return None

    def counts(self) -> Dict[str, int]:
        return {
            "train": len(self.train_ids),
            "validation": len(self.validation_ids),
            "test": len(self.test_ids),
        }

    def to_manifest(self) -> Dict[str, List[str]]:
        """Sorted lists, suitable for a JSON manifest."""
        return {
            "train": sorted(self.train_ids),
            "validation": sorted(self.validation_ids),
            "test": sorted(self.test_ids),
        }

    @classmethod
    def from_manifest(cls, data: Dict[str, List[str]]) -> "SplitSpec":
        return cls(
            train_ids=set(data.get("train", [])),
            validation_ids=set(data.get("validation", [])),
            test_ids=set(data.get("test", [])),
        )


class Vocabulary(BaseModel):
    """Term index fitted on training documents."""

    terms: Dict[str, int] = Field(default_factory=dict)
    document_frequency: List[int] = Field(default_factory=list)
    idf: List[float] = Field(default_factory=list, description="Smoothed idf per term index")
    n_documents: int = Field(0, ge=0)
    min_df: int = Field(1, ge=1)

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.terms


class WalkConfig(BaseModel):
    """Biased random walk parameters."""

    p: float = Field(1.0, gt=0, description="Return parameter")
    q: float = Field(1.0, gt=0, description="In-out parameter")
    walk_length: int = Field(80, gt=0)
    walks_per_node: int = Field(10, gt=0)
    seed: int = 42


class SkipGramConfig(BaseModel):
    """Skip-gram with negative sampling over walk sentences."""

    dim: int = Field(300, gt=0)
    window: int = Field(10, gt=0)
    negatives: int = Field(5, ge=0)
    epochs: int = Field(5, ge=0)
    lr_start: float = Field(0.025, gt=0)
    lr_end: float = Field(0.0001, gt=0)
    seed: int = 42
    workers: int = Field(1, ge=1)


class PvdbowConfig(BaseModel):
    """Distributed bag-of-words paragraph vectors."""

    model_config = ConfigDict(extra="forbid")

    dim: int = Field(300, gt=0)
    epochs: int = Field(20, ge=0)
    negatives: int = Field(5, ge=0)
    lr_start: float = Field(0.025, gt=0)
    lr_end: float = Field(0.0001, gt=0)
    min_df: int = Field(5, ge=1)
    infer_steps: int = Field(20, ge=0)
    seed: int = 42
    workers: int = Field(1, ge=1)


class MenetConfig(BaseModel):
    """MENET architecture and training hyperparameters."""

    model_config = ConfigDict(extra="forbid")

    n_h11: int = Field(150, gt=0, description="Hidden units, TF-IDF branch")
    n_h12: int = Field(150, gt=0, description="Hidden units, node2vec branch")
    n_h13: int = Field(30, gt=0, description="Hidden units, doc2vec branch")
    n_h14: int = Field(30, gt=0, description="Hidden units, timestamp branch")
    m: Optional[int] = Field(None, gt=0, description="Number of classes")
    learning_rate: float = Field(0.0001, gt=0)
    weight_decay: float = Field(0.1, ge=0, description="L2 penalty on the output layer")
    batch_size: int = Field(64, gt=0)
    max_epochs: int = Field(200, gt=0)
    patience: int = Field(10, ge=1)
    anneal_factor: float = Field(0.9, gt=0, le=1)
    anneal_every: int = Field(10, gt=0)
    optimizer: Literal["adam", "sgd"] = "adam"
    views: List[ViewName] = Field(default_factory=lambda: list(VIEW_NAMES))
    seed: int = 42

    @field_validator('views')
    @classmethod
    def validate_views(cls, v):
        if not v:
            raise ValueError('at least one view is required')
        if len(set(v)) != len(v):
            raise ValueError('duplicate view names')
        # canonical branch order
        return [name for name in VIEW_NAMES if name in v]

    def hidden_sizes(self) -> Dict[str, int]:
        sizes = {
            "tfidf": self.n_h11,
            "node2vec": self.n_h12,
            "doc2vec": self.n_h13,
            "timestamp": self.n_h14,
        }
        return {name: sizes[name] for name in self.views}


class GeoClass(BaseModel):
    """One region class with its training centroid."""

    class_id: int = Field(..., ge=0)
    label: str
    centroid_longitude: float
    centroid_latitude: float
    train_count: int = Field(..., ge=1)


class GeoClassTable(BaseModel):
    """Class id to label and centroid coordinates."""

    classes: List[GeoClass] = Field(default_factory=list)

    def __len__(self) -> int:
        return len(self.classes)

    def labels(self) -> List[str]:
        return [c.label for c in self.classes]

    def label_to_id(self) -> Dict[str, int]:
        return {c.label: c.class_id for c in self.classes}


class EvalReport(BaseModel):
    """Classification and distance metrics on one split."""

    n_users: int = Field(..., ge=0)
    accuracy: float = Field(..., ge=0, le=1)
    mean_km: float = Field(..., ge=0)
    median_km: float = Field(..., ge=0)
    at161: float = Field(..., ge=0, le=1)
    labels: List[str] = Field(default_factory=list)
    confusion: List[List[int]] = Field(default_factory=list, description="Rows: true class, columns: predicted")
    views: List[str] = Field(default_factory=list)


class EpochRecord(BaseModel):
    epoch: int
    train_loss: float
    val_accuracy: float
    lr: float


class TrainingHistory(BaseModel):
    """Per-epoch training trace."""

    records: List[EpochRecord] = Field(default_factory=list)
    best_epoch: int = 0
    best_val_accuracy: float = 0.0
    stopped_early: bool = False


class PathsConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    input: Optional[str] = None
    workdir: str = "work"
    split_file: Optional[str] = None
    label_file: Optional[str] = None


class CorpusConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    format: Literal["jsonl", "geotext_tsv"] = "jsonl"
    train_fraction: float = Field(0.8, gt=0, lt=1)
    validation_fraction: float = Field(0.1, gt=0, lt=1)

    @model_validator(mode='after')
    def validate_fractions(self):
        if self.train_fraction + self.validation_fraction >= 1:
            raise ValueError('train and validation fractions must leave room for a test split')
        return self


class TfidfConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    min_df: int = Field(40, ge=1)


class GraphConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    celebrity_threshold: int = Field(5, ge=1)
    prune_third_party_hubs: bool = True


class Node2vecConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dim: int = Field(300, gt=0)
    p: float = Field(1.0, gt=0)
    q: float = Field(1.0, gt=0)
    walk_length: int = Field(80, gt=0)
    walks_per_node: int = Field(10, gt=0)
    window: int = Field(10, gt=0)
    negatives: int = Field(5, ge=0)
    epochs: int = Field(5, ge=0)
    lr_start: float = Field(0.025, gt=0)
    lr_end: float = Field(0.0001, gt=0)

    def walk_config(self, seed: int) -> WalkConfig:
        return WalkConfig(
            p=self.p, q=self.q, walk_length=self.walk_length,
            walks_per_node=self.walks_per_node, seed=seed
        )

    def skipgram_config(self, seed: int, workers: int = 1) -> SkipGramConfig:
        return SkipGramConfig(
            dim=self.dim, window=self.window, negatives=self.negatives,
            epochs=self.epochs, lr_start=self.lr_start, lr_end=self.lr_end,
            seed=seed, workers=workers
        )


class PipelineConfig(BaseModel):
    """Single configuration for every pipeline stage."""

    model_config = ConfigDict(extra="forbid")

    paths: PathsConfig = Field(default_factory=PathsConfig)
    corpus: CorpusConfig = Field(default_factory=CorpusConfig)
    tfidf: TfidfConfig = Field(default_factory=TfidfConfig)
    doc2vec: PvdbowConfig = Field(default_factory=PvdbowConfig)
    graph: GraphConfig = Field(default_factory=GraphConfig)
    node2vec: Node2vecConfig = Field(default_factory=Node2vecConfig)
    model: MenetConfig = Field(default_factory=MenetConfig)
    task: Literal["region", "state", "custom"] = "custom"
    seed: int = 42
    deterministic: bool = False

    @model_validator(mode='after')
    def propagate_seed(self):
        """The top-level seed drives every stochastic component."""
        self.doc2vec.seed = self.seed
        self.model.seed = self.seed
        return self


class RejectedLine(BaseModel):
    """An input line that could not be parsed into a TweetRecord."""

    line_number: int
    reason: str


class RejectedUser(BaseModel):
    """A user dropped while building documents."""

    user_id: str
    reason: str


class SyntheticCorpusConfig(BaseModel):
    """Generator settings for the four-region synthetic benchmark corpus."""

    model_config = ConfigDict(extra="forbid")

    n_users: int = Field(400, ge=8)
    min_tweets: int = Field(8, ge=1)
    max_tweets: int = Field(12, ge=1)
    words_per_tweet: int = Field(6, ge=1)
    regional_word_rate: float = Field(0.5, ge=0, le=1, description="Share of words drawn from the regional pool")
    connected_fraction: float = Field(0.5, ge=0, le=1)
    peers: int = Field(2, ge=1, description="Same-region users each connected user mentions")
    text_signal: bool = True
    mention_signal: bool = True
    hour_signal: bool = True
    seed: int = 42

    @model_validator(mode='after')
    def validate_tweet_range(self):
        if self.min_tweets > self.max_tweets:
            raise ValueError('min_tweets must not exceed max_tweets')
        return self
