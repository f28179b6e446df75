"""Scaling, splitting, feature selection and the linear SVM."""
