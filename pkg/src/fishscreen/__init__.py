"""CPT-game ADHD screening pipeline: sessions, features, selection and a linear SVM."""

__version__ = "0.1.0"
