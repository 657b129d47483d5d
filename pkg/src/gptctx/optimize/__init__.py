"""Linear programming and the see-saw search engines."""
